#ifndef FRAISSE_NORMED_HPP
#define FRAISSE_NORMED_HPP

// Finite-dimensional rational polyhedral norms given by partial norms on a
// finite generating set. The norm is the largest one below the given values:
// gauge(x) = min sum |alpha_a| * value(a) over x = sum alpha_a a.

#include "fraisse/errors.hpp"
#include "fraisse/rational.hpp"
#include "fraisse/report.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fraisse {

struct Generator {
  VectorXq vec;
  Rational norm;
};

/// Partial seminorm, one value per generator.
struct SeminormSpec {
  std::vector<Rational> values;
};

struct ProjectionSpec {
  MatrixXq matrix;
};

struct PartialNormSpace {
  std::vector<std::string> basis;
  std::vector<Generator> generators;
  std::optional<SeminormSpec> seminorm;
  std::optional<ProjectionSpec> projection;

  Index dim() const { return static_cast<Index>(basis.size()); }
  MatrixXq generator_matrix() const;  // generators as columns
  VectorXq norm_values() const;
};

bool operator==(const PartialNormSpace& a, const PartialNormSpace& b);

/// Basis-only presentation: the l1 norm with the given basis weights (default 1).
PartialNormSpace l1_space(std::vector<std::string> basis, std::optional<VectorXq> weights = std::nullopt);

/// Default labels x1..xn.
std::vector<std::string> default_basis(Index n);

/// Throws StructuralError on shape problems (vector lengths, seminorm and projection sizes).
void check_shape(const PartialNormSpace& space);

/// Representation attaining the gauge.
struct GaugeResult {
  Rational value;
  VectorXq coefficients;  // one per generator
};

/// min sum w_k |alpha_k| over g * alpha = x; nullopt when x is not in the span of g.
std::optional<GaugeResult> weighted_gauge(const MatrixXq& g, const VectorXq& w, const VectorXq& x);

Rational gauge_norm(const PartialNormSpace& space, const VectorXq& x);
GaugeResult gauge_representation(const PartialNormSpace& space, const VectorXq& x);

/// Greatest seminorm below the partial seminorm values.
Rational extend_partial_seminorm(const PartialNormSpace& space, const SeminormSpec& spec, const VectorXq& x);
/// Same with the space's own seminorm; throws PreconditionError if it has none.
Rational seminorm_value(const PartialNormSpace& space, const VectorXq& x);

/// Axioms on the generators, self-consistency, spanning, and any carried
/// seminorm or projection. With `unit_basis` every basis vector must be a
/// generator of value 1.
ValidationReport validate_partial_norm(const PartialNormSpace& space, bool unit_basis = false);

struct NormedAmalgam {
  PartialNormSpace space;
  std::vector<Index> left_map;   // left basis index -> amalgam basis index
  std::vector<Index> right_map;  // right basis index -> amalgam basis index
};

/// Amalgam over a base whose basis labels are basis labels of both sides.
/// Non-base labels that collide get ".L" / ".R" suffixes.
NormedAmalgam amalgamate_normed(const PartialNormSpace& left, const PartialNormSpace& right, const PartialNormSpace& base);

/// Coordinate embedding matrix (to.dim x from.dim) for a map between bases.
MatrixXq embedding_matrix(const std::vector<Index>& map, Index to_dim);

/// max over generators a of gauge_to(T a) / value(a).
Rational operator_norm(const MatrixXq& t, const PartialNormSpace& from, const PartialNormSpace& to);

struct IsometryReport {
  bool ok = true;
  bool sampled = false;    // lower bound only checked on a sample
  Rational max_ratio = 0;  // sup ||Tx|| / ||x||
  Rational min_ratio = 0;  // inf ||Tx|| / ||x|| (over the sample when sampled)
  VectorXq worst;          // x attaining the worse of the two bounds
  std::string message;
};

/// (1 - eps)||x|| <= ||Tx|| <= (1 + eps)||x||. Exact up to dimension 4 by
/// minimizing over each facet of the unit ball; sampled above that.
IsometryReport eps_isometry_check(const MatrixXq& t, const PartialNormSpace& from, const PartialNormSpace& to,
                                  const Rational& eps);

/// Same bounds for the seminorms: |S_from(x) - S_to(Tx)| <= eps * S_from(x).
IsometryReport seminorm_distortion_check(const MatrixXq& t, const PartialNormSpace& from, const PartialNormSpace& to,
                                         const Rational& eps);

struct EpsMorphism {
  MatrixXq map;
  Rational eps;
};

/// Isometry bounds, plus the seminorm bounds when both sides carry seminorms.
ValidationReport check_eps_morphism(const EpsMorphism& phi, const PartialNormSpace& from, const PartialNormSpace& to);

/// Grid with step eta / (n c) inside the ball of radius R, c the largest
/// basis-vector norm. Lexicographic order.
std::vector<VectorXq> eps_net_ball(const PartialNormSpace& space, const Rational& radius, const Rational& eta);

/// min ||x - M y|| over y; M's columns span the subspace.
Rational distance_to_subspace(const PartialNormSpace& space, const VectorXq& x, const MatrixXq& subspace);

struct Quotient {
  PartialNormSpace space;  // norm = seminorm of the original
  MatrixXq map;            // quotient coordinates of x
  MatrixXq lift;           // quotient coordinates -> representatives
  MatrixXq kernel;         // basis of the seminorm kernel, as columns
};

/// Presentation of X / ker(S). The complement is spanned by the first basis
/// vectors (in order) that are independent of the kernel.
Quotient quotient_by_seminorm(const PartialNormSpace& space, const SeminormSpec& spec);

/// Idempotence, norm one, range equal to the seminorm kernel, and
/// S(a) = dist(a, range) on every generator.
ValidationReport validate_projection(const PartialNormSpace& space, const SeminormSpec& spec, const ProjectionSpec& proj);

/// Replaces each generator value by its gauge, which makes the presentation self-consistent.
PartialNormSpace normalized_to_gauge(PartialNormSpace space);

}  // namespace fraisse

#endif  // FRAISSE_NORMED_HPP
