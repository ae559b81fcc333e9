#include "fraisse/metric.hpp"

#include <set>
#include <unordered_map>

namespace fraisse {

MetricSpace::MetricSpace(std::vector<std::string> labels, MatrixXq dist)
    : labels_(std::move(labels)), dist_(std::move(dist)) {
  const auto n = static_cast<Index>(labels_.size());
  if (dist_.rows() != dist_.cols())
    throw StructuralError("distance matrix is " + std::to_string(dist_.rows()) + "x" +
                          std::to_string(dist_.cols()) + ", not square");
  if (dist_.rows() != n)
    throw StructuralError("distance matrix has " + std::to_string(dist_.rows()) + " rows for " + std::to_string(n) +
                          " points");
  std::set<std::string> seen;
  for (const auto& l : labels_) {
    if (l.empty()) throw StructuralError("empty point label");
    if (!seen.insert(l).second) throw StructuralError("duplicate point label '" + l + "'");
  }
}

std::optional<Index> MetricSpace::find(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return static_cast<Index>(i);
  return std::nullopt;
}

Index MetricSpace::index_of(std::string_view label) const {
  auto i = find(label);
  if (!i) throw StructuralError("unknown point label '" + std::string(label) + "'");
  return *i;
}

Rational MetricSpace::diameter() const {
  Rational best = 0;
  for (Index i = 0; i < size(); ++i)
    for (Index j = i + 1; j < size(); ++j) best = max(best, dist_(i, j));
  return best;
}

MetricSpace MetricSpace::restrict(const std::vector<Index>& points) const {
  const auto n = static_cast<Index>(points.size());
  std::vector<std::string> labels;
  MatrixXq d(n, n);
  for (Index i = 0; i < n; ++i) {
    labels.push_back(label(points[static_cast<std::size_t>(i)]));
    for (Index j = 0; j < n; ++j) d(i, j) = dist_(points[static_cast<std::size_t>(i)], points[static_cast<std::size_t>(j)]);
  }
  return MetricSpace(std::move(labels), std::move(d));
}

ValidationReport validate_metric(const MetricSpace& space) {
  ValidationReport report;
  const Index n = space.size();
  for (Index i = 0; i < n; ++i)
    if (space.d(i, i) != 0)
      report.add("zero_diagonal", {space.label(i)}, "d = " + format_rational(space.d(i, i)));
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      if (space.d(i, j) != space.d(j, i))
        report.add("symmetry", {space.label(i), space.label(j)},
                   format_rational(space.d(i, j)) + " != " + format_rational(space.d(j, i)));
      if (space.d(i, j) <= 0 || space.d(j, i) <= 0)
        report.add("positivity", {space.label(i), space.label(j)}, "d = " + format_rational(space.d(i, j)));
    }
  for (Index x = 0; x < n; ++x)
    for (Index z = x + 1; z < n; ++z)
      for (Index y = 0; y < n; ++y) {
        if (y == x || y == z) continue;
        const Rational via = space.d(x, y) + space.d(y, z);
        if (space.d(x, z) > via)
          report.add("triangle", {space.label(x), space.label(y), space.label(z)},
                     format_rational(space.d(x, z)) + " > " + format_rational(via));
      }
  return report;
}

Index tuple_count(Index points, int arity) {
  Index c = 1;
  for (int k = 0; k < arity; ++k) c *= points;
  return c;
}

Index TupleMetric::count() const { return tuple_count(base_->size(), arity_); }

std::vector<Index> TupleMetric::decode(Index code) const {
  std::vector<Index> t(static_cast<std::size_t>(arity_));
  for (int k = arity_ - 1; k >= 0; --k) {
    t[static_cast<std::size_t>(k)] = code % base_->size();
    code /= base_->size();
  }
  return t;
}

Index TupleMetric::encode(const std::vector<Index>& tuple) const {
  Index code = 0;
  for (Index v : tuple) code = code * base_->size() + v;
  return code;
}

Rational TupleMetric::distance(const std::vector<Index>& a, const std::vector<Index>& b) const {
  Rational s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += base_->d(a[k], b[k]);
  return s;
}

void require_isometric_subspace(const MetricSpace& base, const MetricSpace& space, const std::string& side) {
  std::vector<Index> at;
  for (const auto& l : base.labels()) {
    auto i = space.find(l);
    if (!i) throw PreconditionError("base point '" + l + "' missing from " + side);
    at.push_back(*i);
  }
  for (Index i = 0; i < base.size(); ++i)
    for (Index j = i + 1; j < base.size(); ++j)
      if (base.d(i, j) != space.d(at[static_cast<std::size_t>(i)], at[static_cast<std::size_t>(j)]))
        throw PreconditionError("base pair (" + base.label(i) + ", " + base.label(j) + ") has distance " +
                                format_rational(base.d(i, j)) + " in base but " +
                                format_rational(space.d(at[static_cast<std::size_t>(i)], at[static_cast<std::size_t>(j)])) +
                                " in " + side);
}

Interval admissible_interval(const MetricSpace& left, const MetricSpace& right, const MetricSpace& base,
                             std::string_view x, std::string_view y) {
  if (base.empty()) throw PreconditionError("admissible interval over an empty base is unbounded; use joint embedding");
  require_isometric_subspace(base, left, "left");
  require_isometric_subspace(base, right, "right");
  const Index xi = left.index_of(x);
  const Index yi = right.index_of(y);
  if (base.contains(x) || base.contains(y)) throw PreconditionError("interval endpoints must lie outside the base");
  Interval out;
  bool first = true;
  for (const auto& z : base.labels()) {
    const Rational& a = left.d(xi, left.index_of(z));
    const Rational& b = right.d(right.index_of(z), yi);
    Rational lo = abs(a - b);
    Rational hi = a + b;
    if (first || lo > out.lo) out.lo = lo;
    if (first || hi < out.hi) out.hi = hi;
    first = false;
  }
  return out;
}

Amalgam amalgamate_greatest(const MetricSpace& left, const MetricSpace& right, const MetricSpace& base) {
  if (base.empty()) throw PreconditionError("amalgamation over an empty base is a joint embedding; use joint_embed_far_apart");
  require_isometric_subspace(base, left, "left");
  require_isometric_subspace(base, right, "right");

  std::vector<Index> right_only;
  for (Index j = 0; j < right.size(); ++j)
    if (!base.contains(right.label(j))) right_only.push_back(j);

  std::vector<std::string> labels = left.labels();
  std::vector<std::string> extra;
  for (Index j : right_only) extra.push_back(right.label(j));
  for (std::size_t k = 0; k < extra.size(); ++k) {
    auto li = left.find(extra[k]);
    if (!li) continue;
    labels[static_cast<std::size_t>(*li)] += ".L";
    extra[k] += ".R";
  }
  labels.insert(labels.end(), extra.begin(), extra.end());
  std::set<std::string> unique(labels.begin(), labels.end());
  if (unique.size() != labels.size()) throw StructuralError("label collision persists after .L/.R suffixing");

  const Index nl = left.size();
  const Index n = nl + static_cast<Index>(right_only.size());
  Amalgam out;
  out.left_map.resize(static_cast<std::size_t>(nl));
  for (Index i = 0; i < nl; ++i) out.left_map[static_cast<std::size_t>(i)] = i;
  out.right_map.assign(static_cast<std::size_t>(right.size()), -1);
  for (std::size_t k = 0; k < right_only.size(); ++k) out.right_map[static_cast<std::size_t>(right_only[k])] = nl + static_cast<Index>(k);
  std::vector<Index> base_left, base_right;
  for (const auto& z : base.labels()) {
    base_left.push_back(left.index_of(z));
    base_right.push_back(right.index_of(z));
    out.right_map[static_cast<std::size_t>(base_right.back())] = base_left.back();
  }

  MatrixXq d(n, n);
  d.topLeftCorner(nl, nl) = left.dist();
  for (std::size_t a = 0; a < right_only.size(); ++a)
    for (std::size_t b = 0; b < right_only.size(); ++b)
      d(nl + static_cast<Index>(a), nl + static_cast<Index>(b)) = right.d(right_only[a], right_only[b]);
  for (Index x = 0; x < nl; ++x)
    for (std::size_t b = 0; b < right_only.size(); ++b) {
      const Index y = right_only[b];
      Rational best;
      for (std::size_t z = 0; z < base_left.size(); ++z) {
        Rational via = left.d(x, base_left[z]) + right.d(base_right[z], y);
        if (z == 0 || via < best) best = std::move(via);
      }
      d(x, nl + static_cast<Index>(b)) = best;
      d(nl + static_cast<Index>(b), x) = best;
    }
  out.space = MetricSpace(std::move(labels), std::move(d));
  return out;
}

std::optional<Violation> katetov_violation(const MetricSpace& space, const VectorXq& profile) {
  if (profile.size() != space.size())
    throw StructuralError("profile has " + std::to_string(profile.size()) + " entries for " +
                          std::to_string(space.size()) + " points");
  for (Index i = 0; i < space.size(); ++i)
    if (profile(i) <= 0)
      return Violation{"katetov_positive", {space.label(i)}, "profile value " + format_rational(profile(i))};
  for (Index i = 0; i < space.size(); ++i)
    for (Index j = i + 1; j < space.size(); ++j) {
      if (abs(profile(i) - profile(j)) > space.d(i, j))
        return Violation{"katetov_lower", {space.label(i), space.label(j)},
                         "|" + format_rational(profile(i)) + " - " + format_rational(profile(j)) + "| > " +
                             format_rational(space.d(i, j))};
      if (space.d(i, j) > profile(i) + profile(j))
        return Violation{"katetov_upper", {space.label(i), space.label(j)},
                         format_rational(space.d(i, j)) + " > " + format_rational(profile(i)) + " + " +
                             format_rational(profile(j))};
    }
  return std::nullopt;
}

MetricSpace one_point_extend(const MetricSpace& space, const VectorXq& profile, const std::string& label) {
  if (space.contains(label)) throw StructuralError("label '" + label + "' already present");
  if (auto v = katetov_violation(space, profile)) {
    std::string who;
    for (const auto& w : v->witness) who += (who.empty() ? "" : ", ") + w;
    throw PreconditionError(v->rule + " violated at (" + who + "): " + v->detail);
  }
  const Index n = space.size();
  MatrixXq d(n + 1, n + 1);
  d.topLeftCorner(n, n) = space.dist();
  for (Index i = 0; i < n; ++i) {
    d(i, n) = profile(i);
    d(n, i) = profile(i);
  }
  d(n, n) = 0;
  auto labels = space.labels();
  labels.push_back(label);
  return MetricSpace(std::move(labels), std::move(d));
}

void for_each_embedding(const MetricSpace& small, const MetricSpace& big,
                        const std::function<bool(const std::vector<Index>&)>& extend_ok,
                        const std::function<bool(const std::vector<Index>&)>& visit) {
  const Index n = small.size();
  if (n > big.size()) return;
  std::vector<Index> map;
  std::vector<bool> used(static_cast<std::size_t>(big.size()), false);
  bool stop = false;
  auto rec = [&](auto&& self) -> void {
    const auto k = static_cast<Index>(map.size());
    if (k == n) {
      if (!visit(map)) stop = true;
      return;
    }
    for (Index c = 0; c < big.size() && !stop; ++c) {
      if (used[static_cast<std::size_t>(c)]) continue;
      bool fits = true;
      for (Index j = 0; j < k && fits; ++j) fits = small.d(j, k) == big.d(map[static_cast<std::size_t>(j)], c);
      if (!fits) continue;
      map.push_back(c);
      if (!extend_ok || extend_ok(map)) {
        used[static_cast<std::size_t>(c)] = true;
        self(self);
        used[static_cast<std::size_t>(c)] = false;
      }
      map.pop_back();
    }
  };
  rec(rec);
}

std::vector<std::vector<Index>> enumerate_embeddings(const MetricSpace& small, const MetricSpace& big) {
  std::vector<std::vector<Index>> out;
  for_each_embedding(small, big, nullptr, [&](const std::vector<Index>& m) {
    out.push_back(m);
    return true;
  });
  return out;
}

}  // namespace fraisse
