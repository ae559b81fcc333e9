#include "fraisse/free_space.hpp"

#include "fraisse/simplex.hpp"

namespace fraisse {

PointedSpace make_pointed(MetricSpace space, std::string basepoint) {
  if (!space.contains(basepoint)) throw StructuralError("basepoint '" + basepoint + "' is not a point of the space");
  return {std::move(space), std::move(basepoint)};
}

Molecule dirac_difference(const std::string& x, const std::string& y) {
  Molecule m;
  m.coeffs[x] += 1;
  m.coeffs[y] -= 1;
  return m;
}

VectorXq molecule_vector(const PointedSpace& space, const Molecule& m) {
  const Index base = space.base_index();
  VectorXq out = VectorXq::Zero(space.space.size());
  Rational sum = 0;
  for (const auto& [label, c] : m.coeffs) {
    out(space.space.index_of(label)) += c;
    sum += c;
  }
  if (m.coeffs.count(space.basepoint)) {
    if (sum != 0) throw PreconditionError("molecule is unbalanced: coefficients sum to " + format_rational(sum));
  } else {
    out(base) = -sum;
  }
  return out;
}

FreeNormResult free_norm(const PointedSpace& space, const Molecule& m) {
  const VectorXq mv = molecule_vector(space, m);
  const Index n = space.space.size();
  const Index base = space.base_index();
  LinearProgram<Rational> lp;
  std::vector<std::pair<Index, Index>> edges;
  for (Index x = 0; x < n; ++x)
    for (Index y = 0; y < n; ++y)
      if (x != y) {
        lp.add_variable(space.space.d(x, y));
        edges.emplace_back(x, y);
      }
  // The basepoint row is implied by the others.
  for (Index p = 0; p < n; ++p) {
    if (p == base) continue;
    std::vector<std::pair<Index, Rational>> terms;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (edges[e].first == p) terms.emplace_back(static_cast<Index>(e), Rational(1));
      if (edges[e].second == p) terms.emplace_back(static_cast<Index>(e), Rational(-1));
    }
    lp.add_constraint(std::move(terms), Relation::equal, mv(p));
  }
  FreeNormResult out;
  if (edges.empty()) return out;
  auto r = lp.minimize();
  if (r.status != LpStatus::optimal) throw InternalError("transport LP did not reach an optimum");
  out.value = r.objective;
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (r.x(static_cast<Index>(e)) != 0) out.flow.push_back({edges[e].first, edges[e].second, r.x(static_cast<Index>(e))});
  return out;
}

DualResult kantorovich_dual(const PointedSpace& space, const Molecule& m) {
  const VectorXq mv = molecule_vector(space, m);
  const Index n = space.space.size();
  const Index base = space.base_index();
  LinearProgram<Rational> lp;
  std::vector<Index> var(static_cast<std::size_t>(n), -1);
  for (Index p = 0; p < n; ++p)
    if (p != base) var[static_cast<std::size_t>(p)] = lp.add_variable(Rational(-mv(p)), true);
  for (Index x = 0; x < n; ++x)
    for (Index y = 0; y < n; ++y) {
      if (x == y) continue;
      std::vector<std::pair<Index, Rational>> terms;
      if (x != base) terms.emplace_back(var[static_cast<std::size_t>(x)], Rational(1));
      if (y != base) terms.emplace_back(var[static_cast<std::size_t>(y)], Rational(-1));
      lp.add_constraint(std::move(terms), Relation::less_equal, space.space.d(x, y));
    }
  DualResult out;
  out.f = VectorXq::Zero(n);
  if (n > 1 && !mv.isZero()) {
    auto r = lp.minimize();
    if (r.status != LpStatus::optimal) throw InternalError("Lipschitz dual LP did not reach an optimum");
    out.value = -r.objective;
    for (Index p = 0; p < n; ++p)
      if (p != base) out.f(p) = r.x(var[static_cast<std::size_t>(p)]);
  }
  const Rational primal = free_norm(space, m).value;
  if (primal != out.value)
    throw InternalError("duality gap: primal " + format_rational(primal) + ", dual " + format_rational(out.value));
  return out;
}

LiftReport lift_check(const PointedSpace& space, const PartialNormSpace& target, const PointMap& f, const Rational& lipschitz,
                      const std::vector<Molecule>& molecules) {
  check_shape(target);
  if (lipschitz < 0) throw PreconditionError("Lipschitz constant must be non-negative");
  const Index n = space.space.size();
  const Index base = space.base_index();
  MatrixXq img = MatrixXq::Zero(target.dim(), n);
  for (const auto& [label, v] : f) {
    const Index p = space.space.index_of(label);
    if (v.size() != target.dim())
      throw StructuralError("image of '" + label + "' has dimension " + std::to_string(v.size()) + ", target has " +
                            std::to_string(target.dim()));
    img.col(p) = v;
  }
  for (Index p = 0; p < n; ++p)
    if (p != base && !f.count(space.space.label(p))) throw StructuralError("no image for point '" + space.space.label(p) + "'");
  if (!img.col(base).isZero()) throw PreconditionError("F must vanish at the basepoint '" + space.basepoint + "'");
  for (Index x = 0; x < n; ++x)
    for (Index y = x + 1; y < n; ++y) {
      const Rational lhs = gauge_norm(target, VectorXq(img.col(x) - img.col(y)));
      const Rational rhs = lipschitz * space.space.d(x, y);
      if (lhs > rhs)
        throw PreconditionError("F is not L-Lipschitz on (" + space.space.label(x) + ", " + space.space.label(y) +
                                "): " + format_rational(lhs) + " > " + format_rational(rhs));
    }
  LiftReport out;
  for (std::size_t k = 0; k < molecules.size(); ++k) {
    const VectorXq mv = molecule_vector(space, molecules[k]);
    LiftEntry e;
    e.free_norm = free_norm(space, molecules[k]).value;
    e.dual = kantorovich_dual(space, molecules[k]).value;
    e.image_norm = gauge_norm(target, VectorXq(img * mv));
    e.bound = lipschitz * e.free_norm;
    if (e.image_norm > e.bound) out.violations.push_back(static_cast<Index>(k));
    out.entries.push_back(std::move(e));
  }
  return out;
}

}  // namespace fraisse
