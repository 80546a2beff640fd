#pragma once

// Base manifolds given by box-shaped charts and coordinate changes on
// overlaps, plus the deterministic sample sets every pointwise check runs on.

#include <lcf/field.hpp>
#include <lcf/random.hpp>

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace lcf {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

using Box = std::vector<Interval>;

inline bool contains(const Box& box, const Vector& x, double slack = 0.0) {
  if (static_cast<std::size_t>(x.size()) != box.size()) return false;
  for (std::size_t i = 0; i < box.size(); ++i)
    if (x[i] < box[i].lo - slack || x[i] > box[i].hi + slack) return false;
  return true;
}

struct Chart {
  std::string id;
  Box box;

  int dim() const { return static_cast<int>(box.size()); }
};

/// U_ab seen from chart `from`: a box in its coordinates (optionally masked),
/// with the coordinate change into chart `to`.
struct Overlap {
  std::string from;
  std::string to;
  Box domain;
  CoordMap map;                      // d_from -> d_to, column-vector valued
  std::optional<MatrixField> mask;   // scalar; a point counts when mask > 0
};

struct Atlas {
  std::vector<Chart> charts;
  std::vector<Overlap> overlaps;

  const Chart* find_chart(const std::string& id) const {
    for (const auto& c : charts)
      if (c.id == id) return &c;
    return nullptr;
  }
  const Chart& chart(const std::string& id) const {
    if (const auto* c = find_chart(id)) return *c;
    throw ValidationError("unknown chart '" + id + "'");
  }
  const Overlap* find_overlap(const std::string& from, const std::string& to) const {
    for (const auto& o : overlaps)
      if (o.from == from && o.to == to) return &o;
    return nullptr;
  }
};

struct SamplePlan {
  std::vector<int> grid{20};  // per dimension; a single entry applies to all
  int random = 50;
  std::uint64_t seed = 42;

  int resolution(std::size_t axis) const {
    if (grid.empty()) return 0;
    return grid.size() == 1 ? grid.front() : grid.at(axis);
  }
};

/// Cell midpoints of a regular grid over `region`, followed by `plan.random`
/// seeded uniform points. Identical inputs give identical lists.
inline std::vector<Vector> sample(const SamplePlan& plan, const Box& region) {
  const std::size_t d = region.size();
  std::vector<Vector> out;
  std::size_t total = 1;
  std::vector<int> res(d);
  for (std::size_t i = 0; i < d; ++i) {
    res[i] = plan.resolution(i);
    total *= static_cast<std::size_t>(std::max(res[i], 0));
  }
  if (d == 0) total = 0;
  out.reserve(total + static_cast<std::size_t>(std::max(plan.random, 0)));
  std::vector<int> idx(d, 0);
  for (std::size_t n = 0; n < total; ++n) {
    Vector x(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
      const double w = (region[i].hi - region[i].lo) / res[i];
      x[static_cast<Eigen::Index>(i)] = region[i].lo + (idx[i] + 0.5) * w;
    }
    out.push_back(std::move(x));
    for (std::size_t i = d; i-- > 0;) {
      if (++idx[i] < res[i]) break;
      idx[i] = 0;
    }
  }
  Rng rng(plan.seed);
  for (int k = 0; k < plan.random; ++k) {
    Vector x(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) x[static_cast<Eigen::Index>(i)] = rng.uniform(region[i].lo, region[i].hi);
    out.push_back(std::move(x));
  }
  return out;
}

inline Vector apply_map(const CoordMap& psi, const Vector& x) { return psi(x).col(0); }

/// Image point and pushed-forward direction under the overlap's coordinate change.
inline std::pair<Vector, Vector> pushforward_vector(const Overlap& o, const Vector& x, const Vector& v) {
  if (!contains(o.domain, x, 1e-12))
    throw DomainError("point outside overlap " + o.from + "->" + o.to);
  const Vector seeds[] = {v};
  const Jet j = o.map.jet(x, seeds);
  return {j.value.col(0), j.tangents.front().col(0)};
}

/// Jacobian of the coordinate change at x (rows: target coords).
inline Matrix jacobian(const CoordMap& psi, const Vector& x) {
  const auto d = x.size();
  std::vector<Vector> seeds;
  for (Eigen::Index i = 0; i < d; ++i) seeds.push_back(Vector::Unit(d, i));
  const Jet j = psi.jet(x, seeds);
  Matrix out(j.value.rows(), d);
  for (Eigen::Index i = 0; i < d; ++i) out.col(i) = j.tangents[static_cast<std::size_t>(i)].col(0);
  return out;
}

inline bool in_overlap(const Atlas& atlas, const Overlap& o, const Vector& x) {
  if (!contains(o.domain, x)) return false;
  if (o.mask && !((*o.mask)(x)(0, 0) > 0.0)) return false;
  return contains(atlas.chart(o.to).box, apply_map(o.map, x));
}

/// Samples of the overlap domain that pass the mask and land in the target chart.
inline std::vector<Vector> sample_overlap(const Atlas& atlas, const Overlap& o, const SamplePlan& plan) {
  std::vector<Vector> out;
  for (auto& x : sample(plan, o.domain))
    if (in_overlap(atlas, o, x)) out.push_back(std::move(x));
  return out;
}

}  // namespace lcf
