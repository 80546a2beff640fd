#pragma once

// Finite towers of bundles over one base, level j mapped to level i <= j by
// connecting group morphisms g^ji. Levelwise relatedness, projection of the
// top-level connection and the projective consistency of its values.

#include <lcf/morphism.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace lcf {

inline constexpr int kMaxTowerDepth = 8;
inline constexpr double kTowerInvariantTolerance = 1e-9;

struct TowerSpec {
  std::vector<LocalConnectionData> levels;              // level i is levels[i - 1]
  std::map<std::pair<int, int>, GroupMorphism> connectors;  // (j, i), j > i, 1-based

  int depth() const { return static_cast<int>(levels.size()); }

  const LocalConnectionData& level(int i) const {
    if (i < 1 || i > depth()) throw LevelOutOfRange("level " + std::to_string(i) + " outside 1.." + std::to_string(depth()));
    return levels[static_cast<std::size_t>(i - 1)];
  }

  /// g^ji; the identity when j = i.
  GroupMorphism connector(int j, int i) const {
    level(j);
    level(i);
    if (j < i) throw LevelOutOfRange("connectors run from higher to lower levels");
    if (j == i) return GroupMorphism::identity(level(i).group.n);
    auto it = connectors.find({j, i});
    if (it == connectors.end())
      throw TowerInvariantViolation("no connector from level " + std::to_string(j) + " to " + std::to_string(i));
    return it->second;
  }
};

/// Fills in g^ki = g^ji o g^kj for every pair not given explicitly, working
/// down from adjacent connectors.
inline void complete_connectors(TowerSpec& t) {
  for (int gap = 2; gap < t.depth(); ++gap)
    for (int i = 1; i + gap <= t.depth(); ++i) {
      const int k = i + gap;
      if (t.connectors.count({k, i})) continue;
      const auto a = t.connectors.find({k, k - 1});
      const auto b = t.connectors.find({k - 1, i});
      if (a != t.connectors.end() && b != t.connectors.end()) t.connectors.emplace(std::pair{k, i}, compose(b->second, a->second));
    }
}

/// Shared atlas, nondecreasing dimensions, every connector present with the
/// right dimensions, composition consistency on random group elements and
/// g^i_ab = g^ji o g^j_ab on overlap samples. Throws TowerInvariantViolation.
inline void validate_tower(const TowerSpec& t, double tol = kTowerInvariantTolerance, int group_samples = 20) {
  const int N = t.depth();
  if (N < 1) throw TowerInvariantViolation("tower has no levels");
  if (N > kMaxTowerDepth) throw TowerInvariantViolation("tower deeper than " + std::to_string(kMaxTowerDepth));
  for (int i = 2; i <= N; ++i) {
    try {
      require_shared_atlas(t.level(1).atlas, t.level(i).atlas);
    } catch (const AtlasMismatch& e) {
      throw TowerInvariantViolation("level " + std::to_string(i) + ": " + e.what());
    }
    if (t.level(i).group.n < t.level(i - 1).group.n)
      throw TowerInvariantViolation("group dimensions must be nondecreasing up the tower");
  }
  for (int j = 2; j <= N; ++j)
    for (int i = 1; i < j; ++i) {
      const auto g = t.connector(j, i);
      if (g.source_dim() != t.level(j).group.n || g.target_dim() != t.level(i).group.n)
        throw TowerInvariantViolation("connector " + std::to_string(j) + "," + std::to_string(i) + " has wrong dimensions");
    }
  auto fail = [](const std::string& what, double r) {
    throw TowerInvariantViolation(what + " (residual " + detail::format_number(r) + ")");
  };
  Rng rng(t.level(N).plan.seed);
  for (int k = 3; k <= N; ++k)
    for (int j = 2; j < k; ++j)
      for (int i = 1; i < j; ++i) {
        const auto gki = t.connector(k, i), gji = t.connector(j, i), gkj = t.connector(k, j);
        for (int s = 0; s < group_samples; ++s) {
          const Matrix a = random_group_element(t.level(k).group.n, t.level(k).group.generators, rng, 0.5);
          const double r = (gki(a) - gji(gkj(a))).norm();
          if (!(r < tol))
            fail("connectors " + std::to_string(k) + "," + std::to_string(i) + " are not the composite through " +
                     std::to_string(j),
                 r);
        }
      }
  for (int j = 2; j <= N; ++j)
    for (int i = 1; i < j; ++i) {
      const auto gji = t.connector(j, i);
      const auto& top = t.level(j);
      for (const auto& o : top.atlas.overlaps) {
        const auto& gj = top.transition(o.from, o.to);
        const auto& gi = t.level(i).transition(o.from, o.to);
        for (const auto& x : sample_overlap(top.atlas, o, top.plan)) {
          const double r = (gi(x) - gji(gj(x))).norm();
          if (!(r < tol))
            fail("transitions of levels " + std::to_string(j) + " and " + std::to_string(i) + " disagree on " + o.from +
                     "->" + o.to,
                 r);
        }
      }
    }
}

/// g-bar^ji(w^j_a) = w^i_a for every pair j > i, every chart.
inline Report check_tower_related(const TowerSpec& t, double tol = kDefaultTolerance) {
  validate_tower(t);
  Report rep;
  rep.plan = t.level(t.depth()).plan;
  rep.tolerance = tol;
  for (int j = 2; j <= t.depth(); ++j)
    for (int i = 1; i < j; ++i) {
      const auto g = t.connector(j, i);
      for (const auto& c : t.level(j).atlas.charts) {
        const auto& wj = t.level(j).form(c.id);
        const auto& wi = t.level(i).form(c.id);
        ResidualMax r;
        for (const auto& x : sample(rep.plan, c.box))
          for (int k = 0; k < c.dim(); ++k) r.add((g.induced(wj.coefficient(k, x)) - wi.coefficient(k, x)).norm());
        rep.checks.push_back(r.result("tower_related:" + std::to_string(j) + "," + std::to_string(i) + ":" + c.id, tol));
      }
    }
  return rep;
}

/// Level-N data composed with g^Ni.
inline LocalConnectionData project_connection(const TowerSpec& t, int i) {
  const int N = t.depth();
  if (i < 1 || i > N) throw LevelOutOfRange("level " + std::to_string(i) + " outside 1.." + std::to_string(N));
  if (i == N) return t.level(N);
  auto out = associated_connection(t.level(N), t.connector(N, i), t.level(i).group.name);
  out.group.generators = t.level(i).group.generators;
  return out;
}

/// The values w^i(u^i) at every level for a point and tangent at the top;
/// u^i is pushed down by differentiating g^Ni along the group part.
inline std::vector<Matrix> limit_eval(const TowerSpec& t, const PointRep& p, const TangentRep& u) {
  const int N = t.depth();
  std::vector<Matrix> out;
  Jet a;
  a.value = p.a;
  a.tangents = {u.w};
  for (int i = 1; i <= N; ++i) {
    const Jet ai = t.connector(N, i)(a);
    out.push_back(global_form_eval(t.level(i), PointRep{p.chart, p.x, ai.value}, TangentRep{u.v, ai.tangents.front()}));
  }
  return out;
}

/// max over j > i of ||g-bar^ji(v_j) - v_i||.
inline double projective_consistency(const TowerSpec& t, const std::vector<Matrix>& values) {
  double worst = 0.0;
  for (int j = 2; j <= t.depth(); ++j)
    for (int i = 1; i < j; ++i)
      worst = std::max(worst, (t.connector(j, i).induced(values[static_cast<std::size_t>(j - 1)]) -
                               values[static_cast<std::size_t>(i - 1)])
                                  .norm());
  return worst;
}

namespace io {

/// Tower file: {"levels": [bundle description or path, ...], "connectors":
/// {"j,i": expr in g}}. Missing non-adjacent connectors are composed.
inline TowerSpec parse_tower(const json& j, const ParamMap& overrides = {}, const std::filesystem::path& base = {}) {
  if (!j.is_object()) throw ParseError("tower description must be a JSON object");
  TowerSpec t;
  const json levels = j.value("levels", json::array());
  if (!levels.is_array() || levels.empty()) throw ValidationError("levels: expected a non-empty list");
  for (const auto& lj : levels) {
    if (lj.is_string())
      t.levels.push_back(load_bundle((base / lj.get<std::string>()).string(), overrides));
    else
      t.levels.push_back(parse_bundle(lj, overrides));
  }
  if (t.depth() > kMaxTowerDepth) throw ValidationError("levels: at most " + std::to_string(kMaxTowerDepth) + " supported");
  if (j.contains("sample_plan"))
    for (auto& l : t.levels) l.plan = parse_sample_plan(j);
  Diagnostics diag;
  const json cj = j.value("connectors", json::object());
  for (auto it = cj.begin(); it != cj.end(); ++it) {
    const std::string where = "connector '" + it.key() + "'";
    const auto key = parse_pair_key(it.key());
    int hi = 0, lo = 0;
    try {
      if (key) {
        hi = std::stoi(key->first);
        lo = std::stoi(key->second);
      }
    } catch (const std::exception&) {
      hi = lo = 0;
    }
    if (!key || hi <= lo || lo < 1 || hi > t.depth()) {
      diag.error(where, "key must be \"j,i\" with 1 <= i < j <= " + std::to_string(t.depth()));
      continue;
    }
    if (!it.value().is_string()) {
      diag.error(where, "expected an expression string");
      continue;
    }
    try {
      t.connectors.emplace(std::pair{hi, lo},
                           GroupMorphism::parse(it.value().get<std::string>(), t.levels[static_cast<std::size_t>(hi - 1)].group.n,
                                                t.levels[static_cast<std::size_t>(hi - 1)].params));
    } catch (const SyntaxError& e) {
      diag.syntax(where, e.what());
    } catch (const ValidationError& e) {
      diag.error(where, e.what());
    }
  }
  diag.raise();
  complete_connectors(t);
  return t;
}

inline TowerSpec load_tower(const std::string& path, const ParamMap& overrides = {}) {
  return parse_tower(read_json_file(path), overrides, std::filesystem::path(path).parent_path());
}

}  // namespace io

}  // namespace lcf
