/**
 * @file fieldscan.hpp
 * @brief Measure fields over rectangular grids of initial conditions.
 *
 * Work is partitioned by grid point: one continued integration per point
 * yields the records for every requested horizon. Points are independent
 * and written to disjoint slots, so the result does not depend on worker
 * count or scheduling.
 */
#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <mutex>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "sniftle/errors.hpp"
#include "sniftle/flowmap.hpp"
#include "sniftle/matops.hpp"
#include "sniftle/measures.hpp"

namespace sniftle {

enum class ScanFailurePolicy { kRecordNan, kAbort };

struct ScanAxis {
  double min;
  double max;
  std::size_t count;
};

struct ScanSpec {
  std::vector<ScanAxis> axes;
  std::vector<double> times;  // strictly increasing, all > 0
  Mat xi_cov;
  IntegratorConfig integrator;
  ScanFailurePolicy failure_policy = ScanFailurePolicy::kRecordNan;

  void validate(const SystemModel& model) const {
    if (axes.size() != model.n)
      throw InvalidInputError("ScanSpec: grid dimension does not match the model");
    for (const ScanAxis& ax : axes) {
      if (ax.count < 1) throw InvalidInputError("ScanSpec: axis count must be >= 1");
      if (ax.count > 1 && !(ax.min < ax.max))
        throw InvalidInputError("ScanSpec: axis needs min < max");
    }
    if (times.empty()) throw InvalidInputError("ScanSpec: no horizon times");
    double prev = 0.0;
    for (double t : times) {
      if (!(t > prev)) throw InvalidInputError("ScanSpec: times must be increasing and > 0");
      prev = t;
    }
    if (!(times.back() <= model.t_end))
      throw InvalidInputError("ScanSpec: horizon beyond the model time domain");
  }

  std::size_t grid_size() const {
    std::size_t p = 1;
    for (const ScanAxis& ax : axes) p *= ax.count;
    return p;
  }

  /// Row-major over axes, last axis fastest.
  Vec grid_point(std::size_t flat) const {
    Vec x(axes.size());
    for (std::size_t d = axes.size(); d-- > 0;) {
      const ScanAxis& ax = axes[d];
      const std::size_t i = flat % ax.count;
      flat /= ax.count;
      x[d] = ax.count == 1
                 ? ax.min
                 : ax.min + (ax.max - ax.min) * double(i) / double(ax.count - 1);
    }
    return x;
  }

  std::uint64_t hash() const {
    std::uint64_t h = 0xCBF29CE484222325ull;
    auto mix = [&h](double v) {
      std::uint64_t bits;
      static_assert(sizeof(bits) == sizeof(v));
      std::memcpy(&bits, &v, sizeof(bits));
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xFFu;
        h *= 0x100000001B3ull;
      }
    };
    mix(double(axes.size()));
    for (const ScanAxis& ax : axes) {
      mix(ax.min);
      mix(ax.max);
      mix(double(ax.count));
    }
    mix(double(times.size()));
    for (double t : times) mix(t);
    for (std::size_t i = 0; i < xi_cov.dim(); ++i)
      for (std::size_t j = 0; j < xi_cov.dim(); ++j) mix(xi_cov(i, j));
    mix(integrator.step_size);
    mix(double(integrator.jacobian_inverse_mode == JacobianInverseMode::kAdjointOde));
    mix(integrator.defect_threshold);
    mix(double(failure_policy == ScanFailurePolicy::kRecordNan));
    return h;
  }
};

enum class RecordStatus : std::uint8_t { kOk = 0, kFailed = 1, kPending = 2 };

struct FieldResult {
  std::uint64_t spec_hash = 0;
  std::size_t grid_size = 0;
  std::size_t time_count = 0;
  // records[ti * grid_size + gi]: one layer per time
  std::vector<MeasureRecord> records;
  std::vector<RecordStatus> status;

  std::size_t failure_count() const {
    std::size_t c = 0;
    for (RecordStatus s : status)
      if (s == RecordStatus::kFailed) ++c;
    return c;
  }
  bool complete() const {
    for (RecordStatus s : status)
      if (s == RecordStatus::kPending) return false;
    return true;
  }
};

namespace detail {

inline MeasureRecord nan_record(Vec xi0, double t) {
  MeasureRecord r;
  r.xi0 = std::move(xi0);
  r.t = t;
  r.ftle = r.sniftle = r.s2 = r.q2 = std::numeric_limits<double>::quiet_NaN();
  return r;
}

inline void scan_point(const SystemModel& model, const ScanSpec& spec,
                       const SpdMat& xi_cov, std::size_t gi, FieldResult& out) {
  const Vec x0 = spec.grid_point(gi);
  const std::size_t ng = spec.grid_size();
  try {
    const auto sols = solve_flow_captures(model, x0, spec.times, spec.integrator);
    for (std::size_t ti = 0; ti < spec.times.size(); ++ti) {
      out.records[ti * ng + gi] = measures_from_solution(sols[ti], xi_cov);
      out.status[ti * ng + gi] = RecordStatus::kOk;
    }
  } catch (const Error& e) {
    if (spec.failure_policy == ScanFailurePolicy::kAbort) {
      std::string where = "(";
      for (std::size_t d = 0; d < x0.size(); ++d)
        where += (d ? ", " : "") + std::to_string(x0[d]);
      throw NumericError("scan aborted at grid point " + where + "): " + e.what());
    }
    // retry each horizon separately so early times survive a late exit
    for (std::size_t ti = 0; ti < spec.times.size(); ++ti) {
      try {
        const FlowSolution sol = solve_flow(model, x0, spec.times[ti], spec.integrator);
        out.records[ti * ng + gi] = measures_from_solution(sol, xi_cov);
        out.status[ti * ng + gi] = RecordStatus::kOk;
      } catch (const Error&) {
        out.records[ti * ng + gi] = nan_record(x0, spec.times[ti]);
        out.status[ti * ng + gi] = RecordStatus::kFailed;
      }
    }
  }
}

inline void run_points(const SystemModel& model, const ScanSpec& spec,
                       const SpdMat& xi_cov, const std::vector<std::size_t>& points,
                       std::size_t workers, FieldResult& out) {
  if (workers <= 1 || points.size() <= 1) {
    for (std::size_t gi : points) scan_point(model, spec, xi_cov, gi, out);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, points.size()); ++w) {
    pool.emplace_back([&] {
      try {
        for (std::size_t k = next.fetch_add(1); k < points.size(); k = next.fetch_add(1))
          scan_point(model, spec, xi_cov, points[k], out);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

inline FieldResult run_scan(const SystemModel& model, const ScanSpec& spec,
                            std::size_t workers = 1) {
  spec.validate(model);
  const SpdMat xi_cov(spec.xi_cov);
  FieldResult out;
  out.spec_hash = spec.hash();
  out.grid_size = spec.grid_size();
  out.time_count = spec.times.size();
  out.records.resize(out.grid_size * out.time_count);
  out.status.assign(out.records.size(), RecordStatus::kPending);
  std::vector<std::size_t> points(out.grid_size);
  for (std::size_t i = 0; i < points.size(); ++i) points[i] = i;
  detail::run_points(model, spec, xi_cov, points, workers, out);
  return out;
}

/// Completes the pending entries of an interrupted run. The partial result
/// must carry the same spec hash; the completed result is identical to an
/// uninterrupted run.
inline FieldResult checkpoint_and_resume(FieldResult partial, const SystemModel& model,
                                         const ScanSpec& spec, std::size_t workers = 1) {
  spec.validate(model);
  if (partial.spec_hash != spec.hash())
    throw ResumeError("resume: checkpoint does not match the scan spec");
  if (partial.records.size() != spec.grid_size() * spec.times.size())
    throw ResumeError("resume: checkpoint record count mismatch");
  const SpdMat xi_cov(spec.xi_cov);
  std::vector<std::size_t> todo;
  for (std::size_t gi = 0; gi < spec.grid_size(); ++gi) {
    for (std::size_t ti = 0; ti < spec.times.size(); ++ti) {
      if (partial.status[ti * spec.grid_size() + gi] == RecordStatus::kPending) {
        todo.push_back(gi);
        break;
      }
    }
  }
  detail::run_points(model, spec, xi_cov, todo, workers, partial);
  return partial;
}

}  // namespace sniftle
