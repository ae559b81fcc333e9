#ifndef FRAISSE_ENGINE_HPP
#define FRAISSE_ENGINE_HPP

// Finite stages of a Fraisse chain: fair (FIFO) realization of one-point
// extension tasks, certificate replay, embedding and back-and-forth.

#include "fraisse/decorate.hpp"

#include <deque>
#include <optional>
#include <string>
#include <vector>

namespace fraisse {

struct EnumerationBudget {
  Index max_points = 1;
  long max_denominator = 1;
  Rational max_value = 1;

  friend bool operator==(const EnumerationBudget& a, const EnumerationBudget& b) {
    return a.max_points == b.max_points && a.max_denominator == b.max_denominator && a.max_value == b.max_value;
  }
};

void check_budget(const EnumerationBudget& budget);

/// {p/q : q <= max_denominator, 0 < p/q <= max_value} in increasing order,
/// with 0 prepended when `with_zero`.
std::vector<Rational> budget_grid(const EnumerationBudget& budget, bool with_zero);

/// Every one-point extension of ds (over all of ds) whose values lie on the
/// budget grid and which satisfies the class axioms. Ordered by profile
/// (lexicographic, first point most significant), then by payload.
std::vector<PointExtension> enumerate_one_point_extensions(const DecoratedSpace& ds, const EnumerationBudget& budget);

/// True if every value of the descriptor lies on the budget grid and the
/// extension has at most max_points points.
bool within_budget(const PointExtension& ext, Index substructure_size, const EnumerationBudget& budget);

struct ExtensionTask {
  Index stage = 0;             // stage at which the task was enumerated
  std::vector<Index> subset;   // point indices, valid in that stage and every later one
  PointExtension descriptor;   // relative to `subset`, in order
};

struct CertificateRecord {
  Index seq = 0;
  Index stage_enumerated = 0;
  std::vector<std::string> substructure;
  PointExtension descriptor;
  Index realized_at_stage = 0;
  std::string witness;
  bool fresh = false;  // witness was added by this record rather than found
};

struct ChainCertificate {
  AgeClass age = AgeClass::metric;
  EnumerationBudget budget;
  std::string schedule = "fifo";
  Index steps = 0;
  std::vector<CertificateRecord> records;
};

struct Chain {
  std::vector<DecoratedSpace> stages;  // stage k is the restriction of stage k + 1
};

/// FIFO queue of extension tasks. Each stage contributes the substructures
/// that contain its newest point (all substructures for the first stage).
class TaskQueue {
 public:
  explicit TaskQueue(EnumerationBudget budget) : budget_(std::move(budget)) {}

  void add_stage(Index stage_index, const DecoratedSpace& stage);
  /// Next task; enumeration of each substructure happens on first access.
  std::optional<ExtensionTask> next();
  /// True once every task enumerated at a stage <= `stage` has been handed out.
  bool exhausted_through(Index stage);
  bool empty();

 private:
  struct Group {
    Index stage;
    std::vector<Index> subset;
    DecoratedSpace sub;
  };
  void fill();

  EnumerationBudget budget_;
  std::deque<Group> groups_;
  std::deque<ExtensionTask> ready_;
};

/// Grows a chain one realized task at a time.
class ChainBuilder {
 public:
  ChainBuilder(const DecoratedSpace& seed, EnumerationBudget budget);

  /// Pops tasks until one needs a new point and realizes it. Tasks already
  /// witnessed by an existing point are logged on the way. Returns false when
  /// the queue runs dry.
  bool step();
  bool exhausted_through(Index stage) { return queue_.exhausted_through(stage); }

  const Chain& chain() const { return chain_; }
  const ChainCertificate& certificate() const { return cert_; }

 private:
  std::string fresh_label() const;

  Chain chain_;
  ChainCertificate cert_;
  TaskQueue queue_;
};

struct GrowResult {
  Chain chain;
  ChainCertificate certificate;
};

GrowResult grow_chain(const DecoratedSpace& seed, const EnumerationBudget& budget, Index steps);

/// Grows until every task enumerated at stages <= `through_stage` is served,
/// or `max_steps` realizations have been made.
GrowResult grow_until_exhausted(const DecoratedSpace& seed, const EnumerationBudget& budget, Index through_stage,
                                Index max_steps);

struct CertificateReport {
  bool ok = true;
  std::optional<Index> seq;  // record at fault, if any
  std::string message;
  Index records_checked = 0;
  Index pending = 0;  // tasks still queued after the last record
};

/// Replays the FIFO schedule against the chain and checks every witness
/// exactly. With `lag`, every task enumerated at a stage at least `lag`
/// stages before the last one must have been served.
CertificateReport verify_certificate(const Chain& chain, const ChainCertificate& cert, const EnumerationBudget& budget,
                                     std::optional<Index> lag = std::nullopt);

struct MissingTask {
  std::vector<std::string> substructure;
  PointExtension descriptor;
};

struct EmbedResult {
  std::optional<std::vector<Index>> map;  // target index -> index in the last stage
  Index stage = 0;
  std::vector<MissingTask> missing;
};

EmbedResult embed_structure(const DecoratedSpace& target, const Chain& chain, const EnumerationBudget& budget);

struct BackAndForthResult {
  std::vector<std::pair<Index, Index>> map;  // indices in the last stage
  Index rounds_completed = 0;
  std::vector<MissingTask> missing;
  std::string message;
  bool complete(Index rounds) const { return rounds_completed >= rounds; }
};

/// Extends a decoration-preserving partial isometry between substructures of
/// the last stage, alternating forth (new domain point) and back (new range
/// point) steps.
BackAndForthResult back_and_forth(const Chain& chain, const std::vector<std::pair<Index, Index>>& f, Index rounds,
                                  const EnumerationBudget& budget);

}  // namespace fraisse

#endif  // FRAISSE_ENGINE_HPP
