#include "fraisse/gurarij.hpp"

#include "fraisse/linalg.hpp"
#include "fraisse/polytope.hpp"

#include <algorithm>

namespace fraisse {

namespace {

std::string fresh_label(const std::vector<std::string>& taken, std::string want) {
  while (std::find(taken.begin(), taken.end(), want) != taken.end()) want += "'";
  return want;
}

VectorXq padded(const VectorXq& y, Index dim) {
  VectorXq out = VectorXq::Zero(dim);
  out.head(y.size()) = y;
  return out;
}

}  // namespace

PartialNormSpace subspace_presentation(const PartialNormSpace& space, Index dim) {
  check_shape(space);
  if (dim < 0 || dim > space.dim()) throw StructuralError("subspace dimension out of range");
  PartialNormSpace out;
  out.basis.assign(space.basis.begin(), space.basis.begin() + dim);
  if (dim == 0) return out;
  if (dim == space.dim()) {
    out = space;
    out.projection.reset();
    return out;
  }
  std::vector<VectorXq> pts;
  for (const auto& g : space.generators)
    if (g.norm > 0 && !g.vec.isZero()) pts.push_back(g.vec / g.norm);
  MatrixXq p(space.dim(), static_cast<Index>(pts.size()));
  for (std::size_t k = 0; k < pts.size(); ++k) p.col(static_cast<Index>(k)) = pts[k];
  const auto facets = facets_of_symmetric_hull<Rational>(p);
  MatrixXq h(static_cast<Index>(facets.size()), dim);
  for (std::size_t k = 0; k < facets.size(); ++k) h.row(static_cast<Index>(k)) = facets[k].head(dim).transpose();
  for (const auto& v : vertices_of_unit_halfspaces<Rational>(h)) {
    // Keep one of each pair +-v.
    Index lead = 0;
    while (v(lead) == 0) ++lead;
    if (v(lead) > 0) out.generators.push_back({v, Rational(1)});
  }
  if (space.seminorm) {
    SeminormSpec spec;
    for (const auto& g : out.generators) spec.values.push_back(seminorm_value(space, padded(g.vec, space.dim())));
    out.seminorm = spec;
  }
  return out;
}

Rational gurarij_gate(const Rational& eps, const Rational& delta) { return min(Rational(eps / 2), Rational(eps * delta / 10)); }

GurarijStep gurarij_one_step_extend(const PartialNormSpace& current, const PartialNormSpace& f, const MatrixXq& phi,
                                    const Rational& eps_prime, const Rational& eps, GurarijOptions options) {
  check_shape(current);
  check_shape(f);
  if (f.dim() < 1) throw StructuralError("the abstract pair needs at least the vector v");
  const Index e = f.dim() - 1;
  const Index c = current.dim();
  if (phi.rows() != c || phi.cols() != e)
    throw StructuralError("phi must be " + std::to_string(c) + "x" + std::to_string(e));
  if (eps <= 0 || eps_prime <= 0) throw PreconditionError("eps and eps' must be positive");
  if (options.seminorm && (!current.seminorm || !f.seminorm))
    throw PreconditionError("seminorm option needs seminorms on both the stage and the abstract pair");
  if (options.projection && (!current.projection || !f.projection))
    throw PreconditionError("projection option needs projections on both the stage and the abstract pair");

  const VectorXq v = unit_vector(f.dim(), e);
  if (gauge_norm(f, v) != 1) throw PreconditionError("v must have norm 1, got " + format_rational(gauge_norm(f, v)));
  GurarijStep out;
  out.delta = distance_to_subspace(f, v, MatrixXq::Identity(f.dim(), e));
  out.gate = gurarij_gate(eps, out.delta);
  if (!(eps_prime < out.gate))
    throw PreconditionError("parameter gate violated: eps' = " + format_rational(eps_prime) + " must be < min(eps/2, eps*delta/10) = " +
                            format_rational(out.gate) + " (eps = " + format_rational(eps) + ", delta = " + format_rational(out.delta) + ")");
  const PartialNormSpace espace = subspace_presentation(f, e);
  auto pre = eps_isometry_check(phi, espace, current, eps_prime);
  if (!pre.ok) throw PreconditionError("phi is not an eps'-isometry: " + pre.message);

  PartialNormSpace& z = out.z;
  z.basis = current.basis;
  z.basis.push_back(fresh_label(current.basis, "w"));
  std::vector<Rational> semi;
  for (std::size_t k = 0; k < current.generators.size(); ++k) {
    z.generators.push_back({padded(current.generators[k].vec, c + 1), current.generators[k].norm});
    if (options.seminorm) semi.push_back(current.seminorm->values[k]);
  }
  z.generators.push_back({unit_vector(c + 1, c), Rational(1)});
  if (options.seminorm) semi.push_back(seminorm_value(f, v));
  out.extension = MatrixXq::Zero(c + 1, e + 1);
  out.extension.topLeftCorner(c, e) = phi;
  out.extension(c, e) = 1;
  for (std::size_t k = 0; k < f.generators.size(); ++k) {
    const auto& a = f.generators[k];
    if (a.vec(e) == 0) continue;
    const VectorXq y = padded(a.vec.head(e), e + 1);
    z.generators.push_back({VectorXq(out.extension * a.vec), a.norm + eps_prime * gauge_norm(f, y)});
    if (options.seminorm) semi.push_back(f.seminorm->values[k] + eps_prime * seminorm_value(f, y));
  }
  if (options.seminorm) z.seminorm = SeminormSpec{semi};
  z = normalized_to_gauge(z);

  out.inclusion = MatrixXq::Zero(c + 1, c);
  out.inclusion.topRows(c) = MatrixXq::Identity(c, c);
  for (const auto& g : current.generators)
    if (gauge_norm(z, padded(g.vec, c + 1)) != g.norm) throw InternalError("extension changed the norm of the current stage");
  if (!eps_isometry_check(out.inclusion, current, z, 0).ok) throw InternalError("current stage is not isometric inside the extension");
  if (gauge_norm(z, unit_vector(c + 1, c)) != 1) throw InternalError("new vector does not have norm 1");
  out.extension_check = eps_isometry_check(out.extension, f, z, eps);
  if (!out.extension_check.ok) throw InternalError("extension is not an eps-isometry: " + out.extension_check.message);
  if (options.seminorm) out.seminorm_check = seminorm_distortion_check(out.extension, f, z, eps);
  if (options.projection) {
    MatrixXq p = MatrixXq::Zero(c + 1, c + 1);
    p.topLeftCorner(c, c) = current.projection->matrix;
    p.col(c) = out.extension * (f.projection->matrix * v);
    z.projection = ProjectionSpec{p};
    out.projection_report = z.seminorm ? validate_projection(z, *z.seminorm, *z.projection)
                                       : ValidationReport{{{"projection_without_seminorm", {}, "no seminorm to compare with"}}};
  }
  return out;
}

EpsAmalgam amalgamate_eps_morphism(const PartialNormSpace& x, const PartialNormSpace& y, const EpsMorphism& phi) {
  check_shape(x);
  check_shape(y);
  const Index nx = x.dim(), ny = y.dim();
  if (phi.map.rows() != ny || phi.map.cols() != nx) throw StructuralError("phi must be " + std::to_string(ny) + "x" + std::to_string(nx));
  if (phi.eps <= 0) throw PreconditionError("eps must be positive; with eps = 0 the coupling only defines a seminorm");
  if (x.seminorm.has_value() != y.seminorm.has_value()) throw PreconditionError("either both spaces carry seminorms or neither does");
  auto pre = check_eps_morphism(phi, x, y);
  if (!pre.ok()) throw PreconditionError("phi is not an eps-morphism: " + pre.violations.front().detail);

  EpsAmalgam out;
  PartialNormSpace& w = out.w;
  std::vector<std::string> left = x.basis, right = y.basis;
  for (auto& l : left)
    if (std::find(y.basis.begin(), y.basis.end(), l) != y.basis.end()) l += ".L";
  for (auto& r : right)
    if (std::find(x.basis.begin(), x.basis.end(), r) != x.basis.end()) r += ".R";
  w.basis = left;
  w.basis.insert(w.basis.end(), right.begin(), right.end());
  const Index n = nx + ny;
  out.iota_x = MatrixXq::Zero(n, nx);
  out.iota_x.topRows(nx) = MatrixXq::Identity(nx, nx);
  out.iota_y = MatrixXq::Zero(n, ny);
  out.iota_y.bottomRows(ny) = MatrixXq::Identity(ny, ny);
  std::vector<Rational> semi;
  for (std::size_t k = 0; k < x.generators.size(); ++k) {
    w.generators.push_back({VectorXq(out.iota_x * x.generators[k].vec), x.generators[k].norm});
    if (x.seminorm) semi.push_back(x.seminorm->values[k]);
  }
  for (std::size_t k = 0; k < y.generators.size(); ++k) {
    w.generators.push_back({VectorXq(out.iota_y * y.generators[k].vec), y.generators[k].norm});
    if (y.seminorm) semi.push_back(y.seminorm->values[k]);
  }
  const MatrixXq coupling = out.iota_x - out.iota_y * phi.map;
  for (std::size_t k = 0; k < x.generators.size(); ++k) {
    const auto& a = x.generators[k];
    if (a.vec.isZero()) continue;
    w.generators.push_back({VectorXq(coupling * a.vec), phi.eps * a.norm});
    if (x.seminorm) semi.push_back(phi.eps * x.seminorm->values[k]);
  }
  if (x.seminorm) w.seminorm = SeminormSpec{semi};
  w = normalized_to_gauge(w);

  out.iso_x = eps_isometry_check(out.iota_x, x, w, 0);
  out.iso_y = eps_isometry_check(out.iota_y, y, w, 0);
  if (!out.iso_x.ok) throw InternalError("X is not isometric inside the amalgam: " + out.iso_x.message);
  if (!out.iso_y.ok) throw InternalError("Y is not isometric inside the amalgam: " + out.iso_y.message);
  out.coupling = operator_norm(MatrixXq(out.iota_y * phi.map - out.iota_x), x, w);
  if (out.coupling > phi.eps) throw InternalError("coupling norm " + format_rational(out.coupling) + " exceeds eps");
  if (x.seminorm) {
    out.semi_x = seminorm_distortion_check(out.iota_x, x, w, 0);
    out.semi_y = seminorm_distortion_check(out.iota_y, y, w, 0);
    if (!out.semi_x->ok || !out.semi_y->ok) throw InternalError("seminorms are not preserved by the amalgam");
  }
  if (x.projection && y.projection) {
    MatrixXq p = MatrixXq::Zero(n, n);
    p.topLeftCorner(nx, nx) = x.projection->matrix;
    p.bottomRightCorner(ny, ny) = y.projection->matrix;
    w.projection = ProjectionSpec{p};
    out.projection_report = w.seminorm ? validate_projection(w, *w.seminorm, *w.projection)
                                       : ValidationReport{{{"projection_without_seminorm", {}, "no seminorm to compare with"}}};
  }
  return out;
}

}  // namespace fraisse
