#pragma once

// Demand forecasters. A forecast made at epoch step t0 covers relative
// steps 1..t_forward; relative step t is absolute step t0 + t.

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "amod/core/errors.hpp"
#include "amod/core/scenario.hpp"
#include "amod/io/csv.hpp"

namespace amod {

struct Forecast {
  int regions = 0;
  int t_forward = 0;
  std::string provenance;  // oracle | historical-average | zero | model-file
  DemandSet lambda_hat;    // keyed by relative step

  int get(int i, int j, Step t) const { return lambda_hat.get(i, j, t); }
  bool empty() const { return lambda_hat.empty(); }

  friend bool operator==(const Forecast& a, const Forecast& b) {
    return a.regions == b.regions && a.t_forward == b.t_forward && a.lambda_hat == b.lambda_hat;
  }
};

// Half-up rounding of a nonnegative demand value.
inline int round_demand(double value) {
  if (!(value >= 0.0) || !std::isfinite(value)) throw InputError("forecast demand must be finite and nonnegative");
  return static_cast<int>(std::floor(value + 0.5));
}

enum class ForecasterKind { kOracle, kHistoricalAverage, kZero, kFile };

inline std::string to_string(ForecasterKind kind) {
  switch (kind) {
    case ForecasterKind::kOracle: return "oracle";
    case ForecasterKind::kHistoricalAverage: return "historical-average";
    case ForecasterKind::kZero: return "zero";
    case ForecasterKind::kFile: return "file";
  }
  return "unknown";
}

inline ForecasterKind parse_forecaster_kind(const std::string& s) {
  if (s == "oracle") return ForecasterKind::kOracle;
  if (s == "historical-average" || s == "historical") return ForecasterKind::kHistoricalAverage;
  if (s == "zero") return ForecasterKind::kZero;
  if (s == "file") return ForecasterKind::kFile;
  throw InputError("unknown forecaster kind '" + s + "'");
}

// Per-cell rounding drops every slot whose mean is below one half; cumulative
// rounding rounds the running total along the window instead, so sparse
// pairs keep their expected volume.
enum class ForecastRounding { kPerCell, kCumulative };

inline ForecastRounding parse_forecast_rounding(const std::string& s) {
  if (s == "per-cell") return ForecastRounding::kPerCell;
  if (s == "cumulative") return ForecastRounding::kCumulative;
  throw InputError("unknown forecast rounding '" + s + "' (per-cell | cumulative)");
}

struct ForecasterOptions {
  ForecasterKind kind = ForecasterKind::kOracle;
  std::string training_log;   // historical-average
  int period = 288;           // historical-average, steps per period
  std::string forecast_file;  // file
  int t_back = 0;
  int t_forward = 24;
  ForecastRounding rounding = ForecastRounding::kCumulative;  // historical-average
};

class Forecaster {
 public:
  virtual ~Forecaster() = default;
  // history: observed demand in absolute steps up to and including t0.
  virtual Forecast forecast(const DemandSet& history, Step t0) const = 0;
  virtual int t_forward() const = 0;
};

class ZeroForecaster final : public Forecaster {
 public:
  ZeroForecaster(int regions, int t_forward) : regions_(regions), t_forward_(t_forward) {}
  Forecast forecast(const DemandSet&, Step) const override { return Forecast{regions_, t_forward_, "zero", {}}; }
  int t_forward() const override { return t_forward_; }

 private:
  int regions_;
  int t_forward_;
};

// Returns the true future demand.
class OracleForecaster final : public Forecaster {
 public:
  OracleForecaster(int regions, DemandSet truth, int t_forward)
      : regions_(regions), truth_(std::move(truth)), t_forward_(t_forward) {}

  Forecast forecast(const DemandSet&, Step t0) const override {
    Forecast fc{regions_, t_forward_, "oracle", {}};
    truth_.for_each_in(t0 + 1, t0 + t_forward_, [&](const DemandKey& key, int count) {
      fc.lambda_hat.set(key.origin, key.destination, key.t - t0, count);
    });
    return fc;
  }
  int t_forward() const override { return t_forward_; }

 private:
  int regions_;
  DemandSet truth_;
  int t_forward_;
};

// Mean count per (i, j, slot within period) over the training days.
class HistoricalAverageForecaster final : public Forecaster {
 public:
  // training: demand over `days` consecutive periods, absolute steps from 1.
  HistoricalAverageForecaster(int regions, const DemandSet& training, int days, int period, int t_forward,
                              ForecastRounding rounding = ForecastRounding::kCumulative)
      : regions_(regions), period_(period), t_forward_(t_forward), rounding_(rounding) {
    if (period < 1 || days < 1) throw InputError("historical average needs period >= 1 and at least one day");
    std::map<DemandKey, long long> sums;
    for (const auto& [key, count] : training.entries()) {
      const Step slot = (key.t - 1) % period + 1;
      sums[DemandKey{slot, key.origin, key.destination}] += count;
    }
    for (const auto& [key, sum] : sums) {
      const double m = static_cast<double>(sum) / days;
      means_[key] = m;
      const int v = round_demand(m);
      if (v > 0) mean_.set(key.origin, key.destination, key.t, v);
    }
  }

  Forecast forecast(const DemandSet&, Step t0) const override {
    Forecast fc{regions_, t_forward_, "historical-average", {}};
    if (rounding_ == ForecastRounding::kPerCell) {
      for (Step t = 1; t <= t_forward_; ++t) {
        const Step slot = (t0 + t - 1) % period_ + 1;
        mean_.for_each_in(slot, slot, [&](const DemandKey& key, int count) {
          fc.lambda_hat.set(key.origin, key.destination, t, count);
        });
      }
      return fc;
    }
    std::map<std::pair<int, int>, double> running;
    std::map<std::pair<int, int>, int> emitted;
    for (Step t = 1; t <= t_forward_; ++t) {
      const Step slot = (t0 + t - 1) % period_ + 1;
      for (auto it = means_.lower_bound(DemandKey{slot, -1, -1}); it != means_.end() && it->first.t == slot; ++it) {
        const std::pair<int, int> od{it->first.origin, it->first.destination};
        running[od] += it->second;
        const int total = round_demand(running[od]);
        const int count = total - emitted[od];
        if (count > 0) fc.lambda_hat.set(od.first, od.second, t, count);
        emitted[od] = total;
      }
    }
    return fc;
  }
  int t_forward() const override { return t_forward_; }
  const DemandSet& slot_means() const { return mean_; }
  const std::map<DemandKey, double>& raw_means() const { return means_; }

 private:
  int regions_;
  int period_;
  int t_forward_;
  ForecastRounding rounding_;
  DemandSet mean_;                      // rounded, keyed by slot
  std::map<DemandKey, double> means_;   // unrounded, keyed by slot
};

// Forecast CSV: t0,t,origin,destination,demand with absolute target step t.
// Blocks are keyed by t0; asking for a missing block is an error.
class FileForecaster final : public Forecaster {
 public:
  FileForecaster(std::map<Step, Forecast> blocks, int regions, int t_forward)
      : blocks_(std::move(blocks)), regions_(regions), t_forward_(t_forward) {}

  Forecast forecast(const DemandSet&, Step t0) const override {
    auto it = blocks_.find(t0);
    if (it == blocks_.end()) throw InputError("forecast file has no block for t0=" + std::to_string(t0));
    Forecast fc{regions_, t_forward_, "model-file", {}};
    it->second.lambda_hat.for_each_in(1, t_forward_, [&](const DemandKey& key, int count) {
      fc.lambda_hat.set(key.origin, key.destination, key.t, count);
    });
    return fc;
  }
  int t_forward() const override { return t_forward_; }
  const std::map<Step, Forecast>& blocks() const { return blocks_; }

 private:
  std::map<Step, Forecast> blocks_;
  int regions_;
  int t_forward_;
};

inline constexpr const char* kForecastHeader = "t0,t,origin,destination,demand";

inline void write_forecast_csv(std::ostream& os, const std::map<Step, Forecast>& blocks, const RegionSet& regions) {
  os << kForecastHeader << '\n';
  for (const auto& [t0, fc] : blocks) {
    // an empty block still needs a row so the reader knows it exists
    if (fc.lambda_hat.empty() && regions.size() > 0) {
      os << t0 << ',' << t0 + 1 << ',' << regions.id(0) << ',' << regions.id(0) << ",0\n";
      continue;
    }
    for (const auto& [key, count] : fc.lambda_hat.entries()) {
      os << t0 << ',' << t0 + key.t << ',' << regions.id(key.origin) << ',' << regions.id(key.destination) << ','
         << count << '\n';
    }
  }
}

// Parses forecast blocks; target steps outside 1..t_forward relative to t0
// are rejected.
inline std::map<Step, Forecast> read_forecast_csv(std::istream& in, const RegionSet& regions, int t_forward,
                                                  const std::string& source = "forecast") {
  io::expect_header(in, kForecastHeader, source);
  std::map<Step, Forecast> blocks;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (io::blank(line)) continue;
    const auto ctx = io::where(source, line_no);
    const auto f = io::split_csv(line);
    if (f.size() != 5) throw InputError(ctx + ": expected 5 fields");
    const auto t0 = static_cast<Step>(io::parse_int(f[0], ctx));
    const auto t = static_cast<Step>(io::parse_int(f[1], ctx));
    const auto origin = regions.index_of(std::string(f[2]));
    const auto destination = regions.index_of(std::string(f[3]));
    if (!origin || !destination) throw InputError(ctx + ": unknown region");
    const double demand = io::parse_double(f[4], ctx);
    if (demand < 0.0) throw InputError(ctx + ": negative demand");
    const Step rel = t - t0;
    if (t0 < 0 || rel < 1 || rel > t_forward) throw InputError(ctx + ": target step outside the forecast horizon");
    auto& fc = blocks[t0];
    fc.regions = regions.size();
    fc.t_forward = t_forward;
    fc.provenance = "model-file";
    fc.lambda_hat.add(*origin, *destination, rel, round_demand(demand));
  }
  return blocks;
}

inline std::map<Step, Forecast> read_forecast_file(const std::string& path, const RegionSet& regions, int t_forward) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open forecast file " + path);
  return read_forecast_csv(in, regions, t_forward, path);
}

struct ForecastSources {
  int regions = 0;
  const RegionSet* region_set = nullptr;  // file forecaster
  const DemandSet* truth = nullptr;       // oracle
  const DemandSet* training = nullptr;    // historical average
  int training_days = 1;
};

inline std::unique_ptr<Forecaster> make_forecaster(const ForecasterOptions& opts, const ForecastSources& sources) {
  if (opts.t_forward < 1) throw InputError("t_forward must be at least 1");
  if (opts.t_back < 0) throw InputError("t_back must be nonnegative");
  switch (opts.kind) {
    case ForecasterKind::kZero:
      return std::make_unique<ZeroForecaster>(sources.regions, opts.t_forward);
    case ForecasterKind::kOracle:
      if (sources.truth == nullptr) throw InputError("oracle forecaster needs the true demand");
      return std::make_unique<OracleForecaster>(sources.regions, *sources.truth, opts.t_forward);
    case ForecasterKind::kHistoricalAverage:
      if (sources.training == nullptr) throw InputError("historical-average forecaster needs a training log");
      return std::make_unique<HistoricalAverageForecaster>(sources.regions, *sources.training,
                                                           sources.training_days, opts.period, opts.t_forward,
                                                           opts.rounding);
    case ForecasterKind::kFile:
      if (sources.region_set == nullptr) throw InputError("file forecaster needs the region set");
      return std::make_unique<FileForecaster>(read_forecast_file(opts.forecast_file, *sources.region_set, opts.t_forward),
                                              sources.regions, opts.t_forward);
  }
  throw InputError("unknown forecaster kind");
}

struct ForecastError {
  double mae = 0.0;
  double rmse = 0.0;
  std::vector<double> mae_per_step;  // index t - 1
};

// Errors over all N*N*t_forward cells, zeros included.
inline ForecastError evaluate_forecast(const Forecast& fc, const Forecast& truth) {
  if (fc.regions != truth.regions || fc.t_forward != truth.t_forward || fc.regions < 1 || fc.t_forward < 1) {
    throw InputError("evaluate_forecast: forecast and truth are not aligned");
  }
  const auto n = static_cast<double>(fc.regions);
  std::map<DemandKey, int> diff;
  for (const auto& [key, count] : fc.lambda_hat.entries()) diff[key] += count;
  for (const auto& [key, count] : truth.lambda_hat.entries()) diff[key] -= count;
  ForecastError e;
  e.mae_per_step.assign(static_cast<std::size_t>(fc.t_forward), 0.0);
  double abs_sum = 0.0, sq_sum = 0.0;
  for (const auto& [key, d] : diff) {
    if (key.t < 1 || key.t > fc.t_forward) throw InputError("evaluate_forecast: entry outside the horizon");
    abs_sum += std::abs(d);
    sq_sum += static_cast<double>(d) * d;
    e.mae_per_step[static_cast<std::size_t>(key.t - 1)] += std::abs(d);
  }
  const double cells = n * n * fc.t_forward;
  e.mae = abs_sum / cells;
  e.rmse = std::sqrt(sq_sum / cells);
  for (auto& v : e.mae_per_step) v /= n * n;
  return e;
}

// Truth for an epoch in forecast form, for evaluation.
inline Forecast truth_window(const DemandSet& demand, int regions, Step t0, int t_forward) {
  Forecast fc{regions, t_forward, "oracle", {}};
  demand.for_each_in(t0 + 1, t0 + t_forward, [&](const DemandKey& key, int count) {
    fc.lambda_hat.set(key.origin, key.destination, key.t - t0, count);
  });
  return fc;
}

}  // namespace amod
