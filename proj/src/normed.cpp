#include "fraisse/normed.hpp"

#include "fraisse/linalg.hpp"
#include "fraisse/polytope.hpp"
#include "fraisse/simplex.hpp"

#include <algorithm>
#include <functional>

namespace fraisse {

namespace {

std::string gen_name(std::size_t k) { return "#" + std::to_string(k); }

bool is_zero(const VectorXq& v) {
  for (Index i = 0; i < v.size(); ++i)
    if (v(i) != 0) return false;
  return true;
}

MatrixXq columns(const std::vector<VectorXq>& cols, Index rows) {
  MatrixXq m(rows, static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) m.col(static_cast<Index>(k)) = cols[k];
  return m;
}

VectorXq seminorm_weights(const PartialNormSpace& s) {
  VectorXq w(static_cast<Index>(s.generators.size()));
  for (std::size_t k = 0; k < s.generators.size(); ++k) w(static_cast<Index>(k)) = s.seminorm->values[k];
  return w;
}

// min over x in conv(vertices) of gauge_{g,w}(t x); vertices are columns.
struct FacetMin {
  Rational value;
  VectorXq x;
};

FacetMin minimize_over_hull(const MatrixXq& vertices, const MatrixXq& t, const MatrixXq& g, const VectorXq& w) {
  const Index k = vertices.cols();
  const Index m = g.cols();
  const Index rows = g.rows();
  MatrixXq a = MatrixXq::Zero(rows + 1, k + 2 * m);
  VectorXq b = VectorXq::Zero(rows + 1);
  VectorXq c = VectorXq::Zero(k + 2 * m);
  const MatrixXq tv = t * vertices;
  a.block(0, 0, rows, k) = -tv;
  a.block(0, k, rows, m) = g;
  a.block(0, k + m, rows, m) = -g;
  for (Index j = 0; j < k; ++j) a(rows, j) = 1;
  b(rows) = 1;
  c.segment(k, m) = w;
  c.segment(k + m, m) = w;
  auto res = minimize_standard<Rational>(a, b, c);
  if (res.status != LpStatus::optimal) throw PreconditionError("image of the unit ball leaves the span of the target generators");
  return {res.objective, vertices * res.x.head(k)};
}

// Unit-sphere vertices a / value(a) of the ball spanned by (g, w), w > 0 entries only.
MatrixXq sphere_vertices(const MatrixXq& g, const VectorXq& w) {
  std::vector<VectorXq> pts;
  for (Index k = 0; k < g.cols(); ++k)
    if (w(k) > 0 && !is_zero(g.col(k))) pts.push_back(g.col(k) / w(k));
  return columns(pts, g.rows());
}

struct LowerBound {
  Rational value;
  VectorXq x;
  bool sampled = false;
};

constexpr Index kExactDim = 4;

// Infimum of gauge_{tg,tw}(t x) over the unit sphere of the ball spanned by (g, w).
LowerBound sphere_minimum(const MatrixXq& g, const VectorXq& w, const MatrixXq& t, const MatrixXq& tg,
                          const VectorXq& tw, const std::function<std::vector<VectorXq>()>& sample) {
  LowerBound out;
  const MatrixXq pts = sphere_vertices(g, w);
  bool first = true;
  auto consider = [&](const Rational& v, const VectorXq& x) {
    if (first || v < out.value) {
      out.value = v;
      out.x = x;
      first = false;
    }
  };
  if (g.rows() <= kExactDim) {
    for (const auto& h : facets_of_symmetric_hull<Rational>(pts)) {
      std::vector<VectorXq> on;
      for (Index k = 0; k < pts.cols(); ++k) {
        const Rational s = h.dot(pts.col(k));
        if (s == 1) on.push_back(pts.col(k));
        if (s == -1) on.push_back(-pts.col(k));
      }
      auto fm = minimize_over_hull(columns(on, g.rows()), t, tg, tw);
      consider(fm.value, fm.x);
    }
  } else {
    out.sampled = true;
    for (const auto& x : sample()) {
      auto num = weighted_gauge(tg, tw, VectorXq(t * x));
      auto den = weighted_gauge(g, w, x);
      if (!num || !den || den->value == 0) continue;
      consider(num->value / den->value, VectorXq(x / den->value));
    }
  }
  return out;
}

std::vector<VectorXq> sphere_sample(const PartialNormSpace& s) {
  std::vector<VectorXq> out;
  for (const auto& g : s.generators) out.push_back(g.vec);
  for (auto& x : eps_net_ball(s, 1, Rational(1, 2)))
    if (!is_zero(x)) out.push_back(std::move(x));
  return out;
}

void require_seminorm(const PartialNormSpace& s, const char* what) {
  if (!s.seminorm) throw PreconditionError(std::string(what) + " carries no seminorm");
}

}  // namespace

MatrixXq PartialNormSpace::generator_matrix() const {
  MatrixXq g(dim(), static_cast<Index>(generators.size()));
  for (std::size_t k = 0; k < generators.size(); ++k) g.col(static_cast<Index>(k)) = generators[k].vec;
  return g;
}

VectorXq PartialNormSpace::norm_values() const {
  VectorXq w(static_cast<Index>(generators.size()));
  for (std::size_t k = 0; k < generators.size(); ++k) w(static_cast<Index>(k)) = generators[k].norm;
  return w;
}

bool operator==(const PartialNormSpace& a, const PartialNormSpace& b) {
  if (a.basis != b.basis || a.generators.size() != b.generators.size()) return false;
  for (std::size_t k = 0; k < a.generators.size(); ++k)
    if (!exactly_equal(a.generators[k].vec, b.generators[k].vec) || a.generators[k].norm != b.generators[k].norm) return false;
  if (a.seminorm.has_value() != b.seminorm.has_value()) return false;
  if (a.seminorm && a.seminorm->values != b.seminorm->values) return false;
  if (a.projection.has_value() != b.projection.has_value()) return false;
  return !a.projection || exactly_equal(a.projection->matrix, b.projection->matrix);
}

std::vector<std::string> default_basis(Index n) {
  std::vector<std::string> out;
  for (Index i = 1; i <= n; ++i) out.push_back("x" + std::to_string(i));
  return out;
}

PartialNormSpace l1_space(std::vector<std::string> basis, std::optional<VectorXq> weights) {
  PartialNormSpace s;
  s.basis = std::move(basis);
  for (Index i = 0; i < s.dim(); ++i) s.generators.push_back({unit_vector(s.dim(), i), weights ? (*weights)(i) : Rational(1)});
  return s;
}

void check_shape(const PartialNormSpace& space) {
  const Index n = space.dim();
  for (std::size_t k = 0; k < space.generators.size(); ++k)
    if (space.generators[k].vec.size() != n)
      throw StructuralError("generator " + gen_name(k) + " has length " + std::to_string(space.generators[k].vec.size()) +
                            ", expected " + std::to_string(n));
  std::vector<std::string> sorted = space.basis;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw StructuralError("duplicate basis label");
  for (const auto& l : space.basis)
    if (l.empty()) throw StructuralError("empty basis label");
  if (space.seminorm && space.seminorm->values.size() != space.generators.size())
    throw StructuralError("seminorm needs one value per generator");
  if (space.projection && (space.projection->matrix.rows() != n || space.projection->matrix.cols() != n))
    throw StructuralError("projection matrix must be " + std::to_string(n) + "x" + std::to_string(n));
}

std::optional<GaugeResult> weighted_gauge(const MatrixXq& g, const VectorXq& w, const VectorXq& x) {
  if (x.size() != g.rows()) throw StructuralError("vector has dimension " + std::to_string(x.size()) + ", expected " + std::to_string(g.rows()));
  const Index m = g.cols();
  if (is_zero(x)) return GaugeResult{Rational(0), VectorXq::Zero(m)};
  if (m == 0) return std::nullopt;
  MatrixXq a(g.rows(), 2 * m);
  a.leftCols(m) = g;
  a.rightCols(m) = -g;
  VectorXq c(2 * m);
  c.head(m) = w;
  c.tail(m) = w;
  auto res = minimize_standard<Rational>(a, x, c);
  if (res.status == LpStatus::infeasible) return std::nullopt;
  if (res.status != LpStatus::optimal) throw InternalError("gauge LP is unbounded; a generator value is negative");
  return GaugeResult{res.objective, VectorXq(res.x.head(m) - res.x.tail(m))};
}

GaugeResult gauge_representation(const PartialNormSpace& space, const VectorXq& x) {
  check_shape(space);
  auto r = weighted_gauge(space.generator_matrix(), space.norm_values(), x);
  if (!r) throw PreconditionError("vector is not in the span of the generators");
  return *r;
}

Rational gauge_norm(const PartialNormSpace& space, const VectorXq& x) { return gauge_representation(space, x).value; }

Rational extend_partial_seminorm(const PartialNormSpace& space, const SeminormSpec& spec, const VectorXq& x) {
  check_shape(space);
  if (spec.values.size() != space.generators.size()) throw StructuralError("seminorm needs one value per generator");
  VectorXq w(static_cast<Index>(spec.values.size()));
  for (std::size_t k = 0; k < spec.values.size(); ++k) w(static_cast<Index>(k)) = spec.values[k];
  auto r = weighted_gauge(space.generator_matrix(), w, x);
  if (!r) throw PreconditionError("vector is not in the span of the generators");
  return r->value;
}

Rational seminorm_value(const PartialNormSpace& space, const VectorXq& x) {
  require_seminorm(space, "space");
  return extend_partial_seminorm(space, *space.seminorm, x);
}

ValidationReport validate_partial_norm(const PartialNormSpace& space, bool unit_basis) {
  check_shape(space);
  ValidationReport report;
  const auto& gens = space.generators;
  bool values_ok = true;
  for (std::size_t k = 0; k < gens.size(); ++k) {
    if (is_zero(gens[k].vec)) {
      if (gens[k].norm != 0) report.add("zero_vector", {gen_name(k)}, "zero vector with value " + format_rational(gens[k].norm));
    } else if (gens[k].norm <= 0) {
      report.add("positivity", {gen_name(k)}, "value " + format_rational(gens[k].norm));
      values_ok = false;
    }
  }
  for (std::size_t i = 0; i < gens.size(); ++i) {
    if (is_zero(gens[i].vec)) continue;
    Index lead = 0;
    while (gens[i].vec(lead) == 0) ++lead;
    for (std::size_t j = i + 1; j < gens.size(); ++j) {
      const Rational alpha = gens[j].vec(lead) / gens[i].vec(lead);
      if (alpha == 0 || !exactly_equal(VectorXq(gens[i].vec * alpha), gens[j].vec)) continue;
      if (gens[j].norm != abs(alpha) * gens[i].norm)
        report.add("scaling", {gen_name(i), gen_name(j)},
                   format_rational(gens[j].norm) + " != " + format_rational(abs(alpha)) + " * " + format_rational(gens[i].norm));
    }
  }
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (std::size_t j = i + 1; j < gens.size(); ++j) {
      const VectorXq sum = gens[i].vec + gens[j].vec;
      for (std::size_t k = 0; k < gens.size(); ++k)
        if (exactly_equal(sum, gens[k].vec) && gens[k].norm > gens[i].norm + gens[j].norm)
          report.add("triangle", {gen_name(i), gen_name(j), gen_name(k)},
                     format_rational(gens[k].norm) + " > " + format_rational(gens[i].norm + gens[j].norm));
    }
  const MatrixXq g = space.generator_matrix();
  const bool spans = rank<Rational>(g) == space.dim();
  if (!spans) report.add("spanning", {}, "generators span a proper subspace");
  if (unit_basis)
    for (Index i = 0; i < space.dim(); ++i) {
      bool found = false;
      for (const auto& gen : gens)
        if (gen.norm == 1 && exactly_equal(gen.vec, unit_vector(space.dim(), i))) found = true;
      if (!found) report.add("unit_basis", {space.basis[static_cast<std::size_t>(i)]}, "basis vector is not a generator of value 1");
    }
  if (spans && values_ok) {
    const VectorXq w = space.norm_values();
    for (std::size_t k = 0; k < gens.size(); ++k) {
      auto r = weighted_gauge(g, w, gens[k].vec);
      if (r && r->value != gens[k].norm)
        report.add("self_consistency", {gen_name(k)},
                   "gauge gives " + format_rational(r->value) + " < " + format_rational(gens[k].norm));
    }
  }
  if (space.seminorm) {
    const auto& s = space.seminorm->values;
    bool nonneg = true;
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (s[k] < 0) {
        report.add("seminorm_nonnegative", {gen_name(k)}, format_rational(s[k]));
        nonneg = false;
      } else if (s[k] > gens[k].norm) {
        report.add("seminorm_lipschitz", {gen_name(k)}, format_rational(s[k]) + " > " + format_rational(gens[k].norm));
      }
    }
    if (nonneg && spans) {
      const VectorXq w = seminorm_weights(space);
      for (std::size_t k = 0; k < gens.size(); ++k) {
        auto r = weighted_gauge(g, w, gens[k].vec);
        if (r && r->value != s[k])
          report.add("seminorm_self_consistency", {gen_name(k)},
                     "extension gives " + format_rational(r->value) + " < " + format_rational(s[k]));
      }
    }
  }
  if (space.projection) {
    if (!space.seminorm)
      report.add("projection_without_seminorm", {}, "a projection needs a seminorm to be compatible with");
    else if (report.ok())
      report.merge(validate_projection(space, *space.seminorm, *space.projection));
  }
  return report;
}

MatrixXq embedding_matrix(const std::vector<Index>& map, Index to_dim) {
  MatrixXq e = MatrixXq::Zero(to_dim, static_cast<Index>(map.size()));
  for (std::size_t i = 0; i < map.size(); ++i) e(map[i], static_cast<Index>(i)) = 1;
  return e;
}

NormedAmalgam amalgamate_normed(const PartialNormSpace& left, const PartialNormSpace& right, const PartialNormSpace& base) {
  check_shape(left);
  check_shape(right);
  check_shape(base);
  if (left.projection || right.projection || base.projection)
    throw PreconditionError("projections are not carried through normed amalgamation");
  if (left.seminorm.has_value() != base.seminorm.has_value() || right.seminorm.has_value() != base.seminorm.has_value())
    throw PreconditionError("either all three spaces carry seminorms or none does");
  auto index_in = [](const PartialNormSpace& s, const std::string& l) -> std::optional<Index> {
    auto it = std::find(s.basis.begin(), s.basis.end(), l);
    if (it == s.basis.end()) return std::nullopt;
    return static_cast<Index>(it - s.basis.begin());
  };
  std::vector<Index> base_in_left, base_in_right;
  for (const auto& l : base.basis) {
    auto a = index_in(left, l);
    auto b = index_in(right, l);
    if (!a || !b) throw PreconditionError("base basis label '" + l + "' is missing from one side");
    base_in_left.push_back(*a);
    base_in_right.push_back(*b);
  }
  for (const auto* side : {&left, &right}) {
    const auto& map = side == &left ? base_in_left : base_in_right;
    const MatrixXq e = embedding_matrix(map, side->dim());
    auto iso = eps_isometry_check(e, base, *side, 0);
    if (!iso.ok)
      throw PreconditionError(std::string("base is not isometrically contained in the ") + (side == &left ? "left" : "right") +
                              " side: " + iso.message);
    if (base.seminorm) {
      auto semi = seminorm_distortion_check(e, base, *side, 0);
      if (!semi.ok) throw PreconditionError("seminorms disagree on the base: " + semi.message);
    }
  }

  NormedAmalgam out;
  auto is_base = [&](const std::string& l) { return index_in(base, l).has_value(); };
  std::vector<std::string> labels = left.basis;
  for (Index i = 0; i < left.dim(); ++i) out.left_map.push_back(i);
  for (Index j = 0; j < right.dim(); ++j) {
    const auto& l = right.basis[static_cast<std::size_t>(j)];
    if (is_base(l)) {
      out.right_map.push_back(*index_in(left, l));
      continue;
    }
    std::string name = l;
    if (auto clash = index_in(left, l)) {
      labels[static_cast<std::size_t>(*clash)] = l + ".L";
      name = l + ".R";
    }
    out.right_map.push_back(static_cast<Index>(labels.size()));
    labels.push_back(name);
  }
  out.space.basis = labels;
  const Index n = static_cast<Index>(labels.size());
  std::vector<Rational> semi;
  auto add = [&](const PartialNormSpace& side, const std::vector<Index>& map) {
    const MatrixXq e = embedding_matrix(map, n);
    for (std::size_t k = 0; k < side.generators.size(); ++k) {
      VectorXq v = e * side.generators[k].vec;
      bool dup = false;
      for (const auto& g : out.space.generators)
        if (exactly_equal(g.vec, v)) dup = true;
      if (dup) continue;
      out.space.generators.push_back({std::move(v), side.generators[k].norm});
      if (side.seminorm) semi.push_back(side.seminorm->values[k]);
    }
  };
  add(left, out.left_map);
  add(right, out.right_map);
  if (base.seminorm) out.space.seminorm = SeminormSpec{semi};

  for (const auto* side : {&left, &right}) {
    const auto& map = side == &left ? out.left_map : out.right_map;
    const MatrixXq e = embedding_matrix(map, n);
    for (std::size_t k = 0; k < side->generators.size(); ++k) {
      const VectorXq v = e * side->generators[k].vec;
      if (gauge_norm(out.space, v) != gauge_norm(*side, side->generators[k].vec))
        throw InternalError("amalgam changes the norm of generator " + gen_name(k));
      if (side->seminorm && seminorm_value(out.space, v) != seminorm_value(*side, side->generators[k].vec))
        throw InternalError("amalgam changes the seminorm of generator " + gen_name(k));
    }
  }
  return out;
}

Rational operator_norm(const MatrixXq& t, const PartialNormSpace& from, const PartialNormSpace& to) {
  check_shape(from);
  check_shape(to);
  if (t.rows() != to.dim() || t.cols() != from.dim()) throw StructuralError("operator has the wrong shape");
  Rational best = 0;
  for (const auto& g : from.generators) {
    if (g.norm <= 0) continue;
    const Rational r = gauge_norm(to, VectorXq(t * g.vec)) / g.norm;
    if (r > best) best = r;
  }
  return best;
}

IsometryReport eps_isometry_check(const MatrixXq& t, const PartialNormSpace& from, const PartialNormSpace& to,
                                  const Rational& eps) {
  check_shape(from);
  check_shape(to);
  if (t.rows() != to.dim() || t.cols() != from.dim()) throw StructuralError("operator has the wrong shape");
  if (rank<Rational>(t) < from.dim()) throw PreconditionError("map is not injective");
  IsometryReport rep;
  rep.max_ratio = 1;
  rep.min_ratio = 1;
  if (from.dim() == 0) return rep;
  rep.max_ratio = 0;
  VectorXq upper_worst;
  for (const auto& g : from.generators) {
    if (g.norm <= 0) continue;
    const Rational r = gauge_norm(to, VectorXq(t * g.vec)) / g.norm;
    if (upper_worst.size() == 0 || r > rep.max_ratio) {
      rep.max_ratio = r;
      upper_worst = g.vec / g.norm;
    }
  }
  auto low = sphere_minimum(from.generator_matrix(), from.norm_values(), t, to.generator_matrix(), to.norm_values(),
                            [&] { return sphere_sample(from); });
  rep.min_ratio = low.value;
  rep.sampled = low.sampled;
  const bool upper_ok = rep.max_ratio <= 1 + eps;
  const bool lower_ok = rep.min_ratio >= 1 - eps;
  rep.ok = upper_ok && lower_ok;
  if (!upper_ok) {
    rep.worst = upper_worst;
    rep.message = "||Tx|| / ||x|| reaches " + format_rational(rep.max_ratio) + " > 1 + " + format_rational(eps);
  } else if (!lower_ok) {
    rep.worst = low.x;
    rep.message = "||Tx|| / ||x|| drops to " + format_rational(rep.min_ratio) + " < 1 - " + format_rational(eps);
  } else {
    rep.worst = rep.max_ratio - 1 >= 1 - rep.min_ratio ? upper_worst : low.x;
  }
  return rep;
}

IsometryReport seminorm_distortion_check(const MatrixXq& t, const PartialNormSpace& from, const PartialNormSpace& to,
                                         const Rational& eps) {
  check_shape(from);
  check_shape(to);
  require_seminorm(from, "source");
  require_seminorm(to, "target");
  if (t.rows() != to.dim() || t.cols() != from.dim()) throw StructuralError("operator has the wrong shape");
  IsometryReport rep;
  rep.max_ratio = 0;
  VectorXq upper_worst;
  for (std::size_t k = 0; k < from.generators.size(); ++k) {
    const VectorXq& a = from.generators[k].vec;
    const Rational s = from.seminorm->values[k];
    const Rational img = seminorm_value(to, VectorXq(t * a));
    if (s == 0) {
      if (img != 0) {
        rep.ok = false;
        rep.worst = a;
        rep.message = "generator " + gen_name(k) + " has seminorm 0 but its image has " + format_rational(img);
        return rep;
      }
      continue;
    }
    if (upper_worst.size() == 0 || img / s > rep.max_ratio) {
      rep.max_ratio = img / s;
      upper_worst = a / s;
    }
  }
  const Quotient q = quotient_by_seminorm(from, *from.seminorm);
  rep.min_ratio = 1;
  LowerBound low{Rational(1), VectorXq(), false};
  if (q.space.dim() > 0) {
    low = sphere_minimum(q.space.generator_matrix(), q.space.norm_values(), MatrixXq(t * q.lift), to.generator_matrix(),
                         seminorm_weights(to), [&] { return sphere_sample(q.space); });
    rep.min_ratio = low.value;
    rep.sampled = low.sampled;
    low.x = q.lift * low.x;
  }
  if (upper_worst.size() == 0) rep.max_ratio = 1;
  const bool upper_ok = rep.max_ratio <= 1 + eps;
  const bool lower_ok = rep.min_ratio >= 1 - eps;
  rep.ok = upper_ok && lower_ok;
  if (!upper_ok) {
    rep.worst = upper_worst;
    rep.message = "S(Tx) / S(x) reaches " + format_rational(rep.max_ratio) + " > 1 + " + format_rational(eps);
  } else if (!lower_ok) {
    rep.worst = low.x;
    rep.message = "S(Tx) / S(x) drops to " + format_rational(rep.min_ratio) + " < 1 - " + format_rational(eps);
  }
  return rep;
}

ValidationReport check_eps_morphism(const EpsMorphism& phi, const PartialNormSpace& from, const PartialNormSpace& to) {
  ValidationReport report;
  if (phi.eps < 0) {
    report.add("eps_negative", {}, format_rational(phi.eps));
    return report;
  }
  auto iso = eps_isometry_check(phi.map, from, to, phi.eps);
  if (!iso.ok) report.add(iso.max_ratio > 1 + phi.eps ? "eps_isometry_upper" : "eps_isometry_lower", {}, iso.message);
  if (from.seminorm && to.seminorm) {
    auto semi = seminorm_distortion_check(phi.map, from, to, phi.eps);
    if (!semi.ok) report.add("eps_seminorm", {}, semi.message);
  }
  return report;
}

std::vector<VectorXq> eps_net_ball(const PartialNormSpace& space, const Rational& radius, const Rational& eta) {
  check_shape(space);
  if (radius <= 0 || eta <= 0) throw PreconditionError("radius and eta must be positive");
  const Index n = space.dim();
  if (n == 0) return {VectorXq(0)};
  Rational c = 0;
  for (Index i = 0; i < n; ++i) c = max(c, gauge_norm(space, unit_vector(n, i)));
  const Rational step = eta / (c * n);
  std::vector<long> reach(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    Rational bound = 0;
    for (const auto& g : space.generators)
      if (g.norm > 0) bound = max(bound, abs(g.vec(i)) / g.norm);
    const Rational steps = radius * bound / step;
    reach[static_cast<std::size_t>(i)] = static_cast<long>(numerator_of(steps) / denominator_of(steps));
  }
  std::vector<VectorXq> out;
  std::vector<long> k(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) k[static_cast<std::size_t>(i)] = -reach[static_cast<std::size_t>(i)];
  const MatrixXq g = space.generator_matrix();
  const VectorXq w = space.norm_values();
  while (true) {
    VectorXq x(n);
    for (Index i = 0; i < n; ++i) x(i) = step * k[static_cast<std::size_t>(i)];
    auto r = weighted_gauge(g, w, x);
    if (r && r->value <= radius) out.push_back(std::move(x));
    Index i = n - 1;
    while (i >= 0 && k[static_cast<std::size_t>(i)] == reach[static_cast<std::size_t>(i)]) {
      k[static_cast<std::size_t>(i)] = -reach[static_cast<std::size_t>(i)];
      --i;
    }
    if (i < 0) break;
    ++k[static_cast<std::size_t>(i)];
  }
  return out;
}

Rational distance_to_subspace(const PartialNormSpace& space, const VectorXq& x, const MatrixXq& subspace) {
  check_shape(space);
  if (x.size() != space.dim() || subspace.rows() != space.dim()) throw StructuralError("dimension mismatch");
  const MatrixXq g = space.generator_matrix();
  const Index m = g.cols();
  const Index k = subspace.cols();
  MatrixXq a(space.dim(), 2 * m + 2 * k);
  a << g, -g, subspace, -subspace;
  VectorXq c = VectorXq::Zero(2 * m + 2 * k);
  c.head(m) = space.norm_values();
  c.segment(m, m) = space.norm_values();
  auto res = minimize_standard<Rational>(a, x, c);
  if (res.status != LpStatus::optimal) throw PreconditionError("vector is not in the span of the generators");
  return res.objective;
}

Quotient quotient_by_seminorm(const PartialNormSpace& space, const SeminormSpec& spec) {
  check_shape(space);
  if (spec.values.size() != space.generators.size()) throw StructuralError("seminorm needs one value per generator");
  const Index n = space.dim();
  std::vector<VectorXq> zero;
  for (std::size_t k = 0; k < spec.values.size(); ++k)
    if (spec.values[k] == 0) zero.push_back(space.generators[k].vec);
  Quotient q;
  q.kernel = column_space_basis<Rational>(columns(zero, n));
  std::vector<VectorXq> span;
  for (Index j = 0; j < q.kernel.cols(); ++j) span.push_back(q.kernel.col(j));
  std::vector<Index> chosen;
  for (Index i = 0; i < n; ++i) {
    span.push_back(unit_vector(n, i));
    if (rank<Rational>(columns(span, n)) == static_cast<Index>(span.size()))
      chosen.push_back(i);
    else
      span.pop_back();
  }
  if (static_cast<Index>(span.size()) != n) throw InternalError("kernel and complement do not span the space");
  const MatrixXq full = columns(span, n);
  const Index qdim = static_cast<Index>(chosen.size());
  // Coordinates in the basis [kernel | chosen unit vectors].
  MatrixXq inv(n, n);
  for (Index i = 0; i < n; ++i) {
    auto col = solve_exact<Rational>(full, unit_vector(n, i));
    if (!col) throw InternalError("basis matrix is singular");
    inv.col(i) = *col;
  }
  q.map = inv.bottomRows(qdim);
  q.lift = full.rightCols(qdim);
  for (const auto i : chosen) q.space.basis.push_back(space.basis[static_cast<std::size_t>(i)]);
  for (std::size_t k = 0; k < spec.values.size(); ++k)
    if (spec.values[k] > 0) q.space.generators.push_back({VectorXq(q.map * space.generators[k].vec), spec.values[k]});
  for (Index j = 0; j < q.kernel.cols(); ++j)
    if (extend_partial_seminorm(space, spec, q.kernel.col(j)) != 0) throw InternalError("seminorm does not vanish on its kernel");
  return q;
}

ValidationReport validate_projection(const PartialNormSpace& space, const SeminormSpec& spec, const ProjectionSpec& proj) {
  check_shape(space);
  const Index n = space.dim();
  if (proj.matrix.rows() != n || proj.matrix.cols() != n)
    throw StructuralError("projection matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  ValidationReport report;
  const MatrixXq& p = proj.matrix;
  if (!exactly_equal(MatrixXq(p * p), p)) report.add("projection_idempotent", {}, "P * P != P");
  for (std::size_t k = 0; k < space.generators.size(); ++k) {
    const auto& g = space.generators[k];
    if (g.norm <= 0) continue;
    const Rational img = gauge_norm(space, VectorXq(p * g.vec));
    if (img > g.norm)
      report.add("projection_norm", {gen_name(k)}, "||P a|| = " + format_rational(img) + " > " + format_rational(g.norm));
  }
  const Quotient q = quotient_by_seminorm(space, spec);
  if (!same_column_space<Rational>(p, q.kernel)) report.add("projection_range", {}, "range of P differs from the seminorm kernel");
  const MatrixXq range = column_space_basis<Rational>(p);
  for (std::size_t k = 0; k < space.generators.size(); ++k) {
    const VectorXq& a = space.generators[k].vec;
    const Rational s = extend_partial_seminorm(space, spec, a);
    const Rational d = distance_to_subspace(space, a, range);
    if (s != d)
      report.add("projection_compatibility", {gen_name(k)}, "S = " + format_rational(s) + " but dist to range = " + format_rational(d));
  }
  return report;
}

PartialNormSpace normalized_to_gauge(PartialNormSpace space) {
  check_shape(space);
  const MatrixXq g = space.generator_matrix();
  const VectorXq w = space.norm_values();
  std::vector<Rational> norms, semis;
  for (const auto& gen : space.generators) {
    auto r = weighted_gauge(g, w, gen.vec);
    if (!r) throw InternalError("generator outside the span of the generators");
    norms.push_back(r->value);
    if (space.seminorm) semis.push_back(extend_partial_seminorm(space, *space.seminorm, gen.vec));
  }
  for (std::size_t k = 0; k < norms.size(); ++k) space.generators[k].norm = norms[k];
  if (space.seminorm) space.seminorm->values = semis;
  return space;
}

}  // namespace fraisse
