#ifndef FRAISSE_GURARIJ_HPP
#define FRAISSE_GURARIJ_HPP

// One-step extension of an almost isometric embedding, and amalgamation
// along an eps-morphism.

#include "fraisse/normed.hpp"

namespace fraisse {

/// Presentation of the subspace spanned by the first `dim` basis vectors,
/// with the restricted norm (generators are the vertices of the section of
/// the unit ball). Exact for spaces of dimension at most 4.
PartialNormSpace subspace_presentation(const PartialNormSpace& space, Index dim);

/// min(eps / 2, eps * delta / 10)
Rational gurarij_gate(const Rational& eps, const Rational& delta);

struct GurarijOptions {
  bool seminorm = false;
  bool projection = false;
};

struct GurarijStep {
  PartialNormSpace z;   // current plus one new basis vector w (last)
  MatrixXq inclusion;   // current -> z
  MatrixXq extension;   // f -> z, v |-> w
  Rational delta;       // dist(v, E)
  Rational gate;
  IsometryReport extension_check;                   // at eps
  std::optional<IsometryReport> seminorm_check;     // extension, at eps
  std::optional<ValidationReport> projection_report;
};

/// `f` is the abstract pair: E is spanned by all basis vectors but the last,
/// v is the last one and must have norm 1. `phi` (current.dim x dim E) must
/// be an eps'-isometry from E into `current`, with eps' below the gate.
GurarijStep gurarij_one_step_extend(const PartialNormSpace& current, const PartialNormSpace& f, const MatrixXq& phi,
                                    const Rational& eps_prime, const Rational& eps, GurarijOptions options = {});

struct EpsAmalgam {
  PartialNormSpace w;  // on the direct sum X + Y
  MatrixXq iota_x;
  MatrixXq iota_y;
  IsometryReport iso_x;
  IsometryReport iso_y;
  Rational coupling;  // operator norm of iota_y phi - iota_x
  std::optional<IsometryReport> semi_x;
  std::optional<IsometryReport> semi_y;
  std::optional<ValidationReport> projection_report;
};

/// W = X + Y presented by (a, 0), (0, b) and the coupling generators
/// (a, -phi a) of value eps * ||a||. Requires eps > 0.
EpsAmalgam amalgamate_eps_morphism(const PartialNormSpace& x, const PartialNormSpace& y, const EpsMorphism& phi);

}  // namespace fraisse

#endif  // FRAISSE_GURARIJ_HPP
