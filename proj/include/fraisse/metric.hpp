#ifndef FRAISSE_METRIC_HPP
#define FRAISSE_METRIC_HPP

#include "fraisse/errors.hpp"
#include "fraisse/rational.hpp"
#include "fraisse/report.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fraisse {

/// Finite space with labelled points and a full rational distance matrix.
/// The constructor only checks shape and labels; the metric axioms are
/// checked by validate_metric.
class MetricSpace {
 public:
  MetricSpace() = default;
  MetricSpace(std::vector<std::string> labels, MatrixXq dist);

  Index size() const { return static_cast<Index>(labels_.size()); }
  bool empty() const { return labels_.empty(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(Index i) const { return labels_[static_cast<std::size_t>(i)]; }
  const MatrixXq& dist() const { return dist_; }
  const Rational& d(Index i, Index j) const { return dist_(i, j); }

  std::optional<Index> find(std::string_view label) const;
  /// Like find, but an unknown label is a StructuralError.
  Index index_of(std::string_view label) const;
  bool contains(std::string_view label) const { return find(label).has_value(); }

  Rational diameter() const;
  /// Subspace on the given points, in the given order.
  MetricSpace restrict(const std::vector<Index>& points) const;

  friend bool operator==(const MetricSpace& a, const MetricSpace& b) {
    return a.labels_ == b.labels_ && exactly_equal(a.dist_, b.dist_);
  }

 private:
  std::vector<std::string> labels_;
  MatrixXq dist_;
};

ValidationReport validate_metric(const MetricSpace& space);

/// Sum metric on n-tuples of points, with tuples indexed in mixed radix
/// (first coordinate most significant).
class TupleMetric {
 public:
  TupleMetric(const MetricSpace& base, int arity) : base_(&base), arity_(arity) {}

  int arity() const { return arity_; }
  Index count() const;
  std::vector<Index> decode(Index code) const;
  Index encode(const std::vector<Index>& tuple) const;
  Rational distance(const std::vector<Index>& a, const std::vector<Index>& b) const;

 private:
  const MetricSpace* base_;
  int arity_;
};

Index tuple_count(Index points, int arity);

struct Interval {
  Rational lo;
  Rational hi;
};

/// Range of distances d(x, y) compatible with a metric amalgam of left and
/// right over base. Base labels must occur in both sides.
Interval admissible_interval(const MetricSpace& left, const MetricSpace& right, const MetricSpace& base,
                             std::string_view x, std::string_view y);

struct Amalgam {
  MetricSpace space;
  std::vector<Index> left_map;   // left index -> amalgam index
  std::vector<Index> right_map;  // right index -> amalgam index
};

/// Greatest metric amalgam. Points are ordered left first, then right-only
/// points; colliding non-base labels get ".L" / ".R" suffixes.
Amalgam amalgamate_greatest(const MetricSpace& left, const MetricSpace& right, const MetricSpace& base);

/// First Katetov violation of a profile (aligned with the space's points), if any.
std::optional<Violation> katetov_violation(const MetricSpace& space, const VectorXq& profile);

MetricSpace one_point_extend(const MetricSpace& space, const VectorXq& profile, const std::string& label);

/// Calls visit for every isometric injection small -> big (as an index map), in
/// lexicographic order. `extend_ok(map)` may veto a partial map whose last entry
/// was just assigned. Enumeration stops when visit returns false.
void for_each_embedding(const MetricSpace& small, const MetricSpace& big,
                        const std::function<bool(const std::vector<Index>&)>& extend_ok,
                        const std::function<bool(const std::vector<Index>&)>& visit);

std::vector<std::vector<Index>> enumerate_embeddings(const MetricSpace& small, const MetricSpace& big);

/// Checks that base sits isometrically (by label) inside space; throws
/// PreconditionError naming the first offending pair.
void require_isometric_subspace(const MetricSpace& base, const MetricSpace& space, const std::string& side);

}  // namespace fraisse

#endif  // FRAISSE_METRIC_HPP
