#pragma once

// Synthetic commute day: a few central regions surrounded by suburbs, a
// morning peak flowing into the centre, an evening peak flowing out, and a
// flat background. Trip durations equal the travel matrix exactly.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "amod/core/errors.hpp"
#include "amod/core/scenario.hpp"
#include "amod/core/trips.hpp"

namespace amod::io {

struct SyntheticParams {
  int regions = 10;
  int centre_regions = 2;
  double delta_t_s = 300.0;
  double tick_s = 6.0;
  int day_steps = 288;
  double trips_per_day = 5000.0;   // expected total
  double morning_peak_h = 8.0;
  double evening_peak_h = 17.5;
  double peak_width_h = 1.0;       // standard deviation
  double peak_share = 0.6;         // fraction of trips inside the two peaks
  double asymmetry = 0.85;         // commute-direction weight within a peak, 0.5 is symmetric
  double area_m = 8000.0;          // side of the square the regions live in
  double speed_m_s = 8.0;
  double base_travel_s = 180.0;
  bool align_to_interval = false;  // requests at interval starts
  std::uint64_t seed = 1;
};

inline std::vector<std::string> check(const SyntheticParams& s) {
  std::vector<std::string> problems;
  if (s.regions < 1) problems.push_back("regions must be >= 1");
  if (s.centre_regions < 0 || s.centre_regions > s.regions) problems.push_back("centre_regions out of range");
  if (!(s.delta_t_s > 0.0) || !(s.tick_s > 0.0) || s.day_steps < 1) problems.push_back("time grid must be positive");
  if (s.trips_per_day < 0.0) problems.push_back("trips_per_day must be >= 0");
  if (s.peak_share < 0.0 || s.peak_share > 1.0) problems.push_back("peak_share must lie in [0, 1]");
  if (s.asymmetry < 0.0 || s.asymmetry > 1.0) problems.push_back("asymmetry must lie in [0, 1]");
  if (!(s.peak_width_h > 0.0) || !(s.speed_m_s > 0.0) || s.area_m < 0.0 || s.base_travel_s < 0.0) {
    problems.push_back("peak width, speed, area and base travel must be positive");
  }
  return problems;
}

struct SyntheticCity {
  Scenario scenario;
  TripLog trips;
  std::vector<bool> is_centre;
};

// Layout and travel times come from params.seed; days drawn with other seeds
// share the same city.
inline SyntheticCity generate_city(const SyntheticParams& params) {
  if (auto problems = check(params); !problems.empty()) throw InputError("synthetic parameters: " + problems.front());
  SyntheticCity city;
  const int n = params.regions;
  auto& sc = city.scenario;
  sc.regions = RegionSet::numbered(n);
  sc.grid = TimeGrid{params.delta_t_s, params.day_steps, params.tick_s};
  city.is_centre.assign(static_cast<std::size_t>(n), false);

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double half = params.area_m / 2.0;
  std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const bool centre = i < params.centre_regions;
    city.is_centre[static_cast<std::size_t>(i)] = centre;
    const double angle = 2.0 * std::numbers::pi * unit(rng);
    const double radius = centre ? 0.15 * half * unit(rng) : half * (0.45 + 0.55 * unit(rng));
    x[static_cast<std::size_t>(i)] = radius * std::cos(angle);
    y[static_cast<std::size_t>(i)] = radius * std::sin(angle);
  }
  std::vector<int> steps(static_cast<std::size_t>(n) * n, 1);
  std::vector<double> seconds(static_cast<std::size_t>(n) * n, params.delta_t_s);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = std::hypot(x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)],
                                  y[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(j)]);
      const int tau = travel_steps(params.base_travel_s + d / params.speed_m_s, sc.grid);
      steps[static_cast<std::size_t>(i * n + j)] = tau;
      seconds[static_cast<std::size_t>(i * n + j)] = tau * params.delta_t_s;
    }
  }
  sc.travel = TravelTimeMatrix(n, std::move(steps), std::move(seconds));
  sc.costs = CostModel::proportional(sc.travel, CostParams{}, params.day_steps);
  return city;
}

// Expected number of requests per (origin, destination, step).
inline std::vector<double> intensity(const SyntheticParams& params, const std::vector<bool>& is_centre) {
  const int n = params.regions;
  const int steps = params.day_steps;
  std::vector<double> rate(static_cast<std::size_t>(n) * n * steps, 0.0);
  if (n < 2 || params.trips_per_day == 0.0) return rate;

  auto gauss = [&](double hour, double centre) {
    const double z = (hour - centre) / params.peak_width_h;
    return std::exp(-0.5 * z * z);
  };
  std::vector<double> morning(static_cast<std::size_t>(steps)), evening(static_cast<std::size_t>(steps));
  double m_sum = 0.0, e_sum = 0.0;
  for (int t = 0; t < steps; ++t) {
    const double hour = (t + 0.5) * params.delta_t_s / 3600.0;
    morning[static_cast<std::size_t>(t)] = gauss(hour, params.morning_peak_h);
    evening[static_cast<std::size_t>(t)] = gauss(hour, params.evening_peak_h);
    m_sum += morning[static_cast<std::size_t>(t)];
    e_sum += evening[static_cast<std::size_t>(t)];
  }

  // Peak OD weights: commute direction a, reverse 1 - a, other pairs a small
  // share. Background is uniform over pairs.
  const double a = params.asymmetry;
  const double other = 0.25 * std::min(a, 1.0 - a) + 0.05;
  std::vector<double> w_in(static_cast<std::size_t>(n) * n, 0.0), w_out(static_cast<std::size_t>(n) * n, 0.0);
  double in_sum = 0.0, out_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const bool ci = is_centre[static_cast<std::size_t>(i)], cj = is_centre[static_cast<std::size_t>(j)];
      double inbound = other, outbound = other;
      if (!ci && cj) {
        inbound = a;
        outbound = 1.0 - a;
      } else if (ci && !cj) {
        inbound = 1.0 - a;
        outbound = a;
      }
      w_in[static_cast<std::size_t>(i * n + j)] = inbound;
      w_out[static_cast<std::size_t>(i * n + j)] = outbound;
      in_sum += inbound;
      out_sum += outbound;
    }
  }
  const double pairs = static_cast<double>(n) * (n - 1);
  const double peak_trips = params.trips_per_day * params.peak_share / 2.0;
  const double background = params.trips_per_day * (1.0 - params.peak_share) / (pairs * steps);
  for (int t = 0; t < steps; ++t) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const auto od = static_cast<std::size_t>(i * n + j);
        double r = background;
        if (in_sum > 0.0 && m_sum > 0.0) r += peak_trips * w_in[od] / in_sum * morning[static_cast<std::size_t>(t)] / m_sum;
        if (out_sum > 0.0 && e_sum > 0.0) r += peak_trips * w_out[od] / out_sum * evening[static_cast<std::size_t>(t)] / e_sum;
        rate[(static_cast<std::size_t>(t) * n + i) * n + j] = r;
      }
    }
  }
  return rate;
}

// One day of Poisson requests drawn with day_seed on the city of params.seed.
inline TripLog generate_day(const SyntheticParams& params, const SyntheticCity& city, std::uint64_t day_seed) {
  const int n = params.regions;
  const auto rate = intensity(params, city.is_centre);
  std::mt19937_64 rng(day_seed);
  std::uniform_real_distribution<double> offset(0.0, params.delta_t_s);
  TripLog log;
  for (int t = 0; t < params.day_steps; ++t) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double r = rate[(static_cast<std::size_t>(t) * n + i) * n + j];
        if (r <= 0.0) continue;
        std::poisson_distribution<int> draw(r);
        const int k = draw(rng);
        for (int c = 0; c < k; ++c) {
          double when = t * params.delta_t_s;
          if (!params.align_to_interval) when += std::floor(offset(rng));
          log.trips.push_back(Trip{when, i, j, city.scenario.travel.seconds(i, j, params.delta_t_s)});
        }
      }
    }
  }
  log.sort();
  return log;
}

// City plus the day drawn with params.seed; demand filled in from the trips.
inline SyntheticCity generate_synthetic(const SyntheticParams& params) {
  SyntheticCity city = generate_city(params);
  city.trips = generate_day(params, city, params.seed);
  city.scenario.demand = demand_from_trips(city.trips, city.scenario.grid);
  return city;
}

// Demand of `days` further days (seeds params.seed + 1 ...), laid end to end
// for the historical-average forecaster.
inline DemandSet training_demand(const SyntheticParams& params, const SyntheticCity& city, int days) {
  DemandSet all;
  for (int d = 0; d < days; ++d) {
    const auto log = generate_day(params, city, params.seed + 1 + static_cast<std::uint64_t>(d));
    const auto demand = demand_from_trips(log, city.scenario.grid);
    for (const auto& [key, count] : demand.entries()) {
      all.add(key.origin, key.destination, key.t + d * params.day_steps, count);
    }
  }
  return all;
}

}  // namespace amod::io
