#include "fraisse/engine.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace fraisse {

namespace {

bool on_grid(const Rational& v, const EnumerationBudget& b, bool allow_zero) {
  if (v == 0) return allow_zero;
  return v > 0 && v <= b.max_value && denominator_of(v) <= b.max_denominator;
}

bool all_on_grid(const VectorXq& v, const EnumerationBudget& b, bool allow_zero) {
  for (Index i = 0; i < v.size(); ++i)
    if (!on_grid(v(i), b, allow_zero)) return false;
  return true;
}

// Odometer over per-slot candidate lists; `ok(slot, chosen)` prunes partial assignments.
void for_each_choice(const std::vector<std::vector<Rational>>& options,
                     const std::function<bool(std::size_t, const std::vector<Rational>&)>& ok,
                     const std::function<void(const std::vector<Rational>&)>& visit) {
  std::vector<Rational> chosen;
  chosen.reserve(options.size());
  std::function<void(std::size_t)> rec = [&](std::size_t slot) {
    if (slot == options.size()) {
      visit(chosen);
      return;
    }
    for (const auto& v : options[slot]) {
      chosen.push_back(v);
      if (ok(slot, chosen)) rec(slot + 1);
      chosen.pop_back();
    }
  };
  rec(0);
}

std::vector<Rational> clip(const std::vector<Rational>& grid, const Rational& lo, const std::optional<Rational>& hi) {
  std::vector<Rational> out;
  for (const auto& g : grid)
    if (g >= lo && (!hi || g <= *hi)) out.push_back(g);
  return out;
}

std::vector<VectorXq> katetov_profiles(const MetricSpace& space, const std::vector<Rational>& grid) {
  const std::size_t n = static_cast<std::size_t>(space.size());
  std::vector<std::vector<Rational>> options(n, grid);
  std::vector<VectorXq> out;
  for_each_choice(
      options,
      [&](std::size_t slot, const std::vector<Rational>& f) {
        const Index j = static_cast<Index>(slot);
        for (Index i = 0; i < j; ++i) {
          const Rational& dij = space.d(i, j);
          if (abs(f[static_cast<std::size_t>(i)] - f[slot]) > dij) return false;
          if (f[static_cast<std::size_t>(i)] + f[slot] < dij) return false;
        }
        return true;
      },
      [&](const std::vector<Rational>& f) {
        VectorXq v(static_cast<Index>(n));
        for (std::size_t i = 0; i < n; ++i) v(static_cast<Index>(i)) = f[i];
        out.push_back(std::move(v));
      });
  return out;
}

VectorXq to_vector(const std::vector<Rational>& v) {
  VectorXq out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Index>(i)) = v[i];
  return out;
}

// Candidate payloads for a fixed profile, before full validation.
std::vector<ExtensionPayload> candidate_payloads(const DecoratedSpace& ds, const VectorXq& profile,
                                                 const EnumerationBudget& budget) {
  const auto g0 = budget_grid(budget, true);
  const Index n = ds.size();
  std::vector<ExtensionPayload> out;
  if (const auto* rel = std::get_if<RelationDecoration>(&ds.decoration)) {
    if (rel->arities.empty()) return {std::monostate{}};
    const MetricSpace ext = one_point_extend(ds.space, profile, "\x01new");
    // Flatten the new tuples of every arity into one list of slots.
    struct Slot {
      std::size_t arity_pos;
      std::vector<Index> tuple;
    };
    std::vector<Slot> slots;
    std::vector<std::vector<Rational>> options;
    for (std::size_t i = 0; i < rel->arities.size(); ++i) {
      const int arity = rel->arities[i];
      const TupleMetric tm_new(ext, arity), tm_old(ds.space, arity);
      for (Index code : tuples_with_last(n, arity)) {
        auto t = tm_new.decode(code);
        Rational lo = 0;
        std::optional<Rational> hi;
        for (Index c = 0; c < rel->values[i].size(); ++c) {
          const Rational dist = tm_new.distance(t, tm_old.decode(c));
          const Rational& v = rel->values[i](c);
          lo = max(lo, v - dist);
          if (!hi || v + dist < *hi) hi = v + dist;
        }
        options.push_back(clip(g0, lo, hi));
        slots.push_back({i, std::move(t)});
      }
    }
    for_each_choice(
        options,
        [&](std::size_t k, const std::vector<Rational>& chosen) {
          const TupleMetric tm(ext, rel->arities[slots[k].arity_pos]);
          for (std::size_t j = 0; j < k; ++j) {
            if (slots[j].arity_pos != slots[k].arity_pos) continue;
            if (abs(chosen[j] - chosen[k]) > tm.distance(slots[j].tuple, slots[k].tuple)) return false;
          }
          return true;
        },
        [&](const std::vector<Rational>& chosen) {
          RelationExtension r;
          r.values.resize(rel->arities.size());
          std::vector<std::vector<Rational>> per(rel->arities.size());
          for (std::size_t k = 0; k < slots.size(); ++k) per[slots[k].arity_pos].push_back(chosen[k]);
          for (std::size_t i = 0; i < per.size(); ++i) r.values[i] = to_vector(per[i]);
          out.emplace_back(std::move(r));
        });
    return out;
  }
  if (const auto* ret = std::get_if<RetractDecoration>(&ds.decoration)) {
    for (const auto& p : g0) {
      out.emplace_back(RetractExtension{p, std::nullopt});
      for (Index a = 0; a < n; ++a)
        if (ret->r[static_cast<std::size_t>(a)] == a) out.emplace_back(RetractExtension{p, a});
    }
    return out;
  }
  if (const auto* con = std::get_if<ControlledDecoration>(&ds.decoration)) {
    const MatrixXq f = induced_control_values(*con);
    const MetricSpace& k = con->proxy.space;
    std::vector<std::vector<Rational>> options;
    for (Index q = 0; q < k.size(); ++q) {
      Rational lo = 0;
      std::optional<Rational> hi;
      for (Index a = 0; a < n; ++a) {
        lo = max(lo, f(a, q) - profile(a));
        if (!hi || f(a, q) + profile(a) < *hi) hi = f(a, q) + profile(a);
      }
      options.push_back(clip(g0, lo, hi));
    }
    for_each_choice(
        options,
        [&](std::size_t slot, const std::vector<Rational>& chosen) {
          const Index q = static_cast<Index>(slot);
          for (Index s = 0; s < q; ++s)
            if (abs(chosen[static_cast<std::size_t>(s)] - chosen[slot]) > k.d(s, q)) return false;
          return true;
        },
        [&](const std::vector<Rational>& chosen) { out.emplace_back(ControlledExtension{to_vector(chosen)}); });
    return out;
  }
  const auto& lip = std::get<LipschitzDecoration>(ds.decoration);
  for (Index z = 0; z < lip.target.space.size(); ++z) out.emplace_back(LipschitzExtension{z});
  return out;
}

std::vector<std::vector<Index>> subsets_for_stage(const DecoratedSpace& stage, Index stage_index, Index max_size) {
  const Index n = stage.size();
  std::vector<std::vector<Index>> out;
  if (n == 0 || max_size < 1) return out;
  const bool all = stage_index == 0;
  const Index newest = n - 1;
  // Choose from the other points (all points for the first stage).
  const Index pool = all ? n : n - 1;
  for (Index size = 1; size <= std::min(max_size, n); ++size) {
    const Index pick = all ? size : size - 1;
    if (pick > pool) break;
    std::vector<Index> idx(static_cast<std::size_t>(pick));
    std::iota(idx.begin(), idx.end(), Index{0});
    while (true) {
      std::vector<Index> s = idx;
      if (!all) s.push_back(newest);
      if (!std::holds_alternative<RetractDecoration>(stage.decoration) || is_closed_substructure(stage, s))
        out.push_back(std::move(s));
      // Next combination of `pick` out of `pool`.
      Index i = pick - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] == pool - pick + i) --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (Index j = i + 1; j < pick; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

std::vector<std::string> labels_of(const DecoratedSpace& ds, const std::vector<Index>& pts) {
  std::vector<std::string> out;
  for (Index p : pts) out.push_back(ds.space.label(p));
  return out;
}

// Descriptor of x over `sub`, or nothing when x does not extend sub as a
// substructure (an Age2 point retracting outside it).
std::optional<PointExtension> descriptor_of(const DecoratedSpace& ds, const std::vector<Index>& sub, Index x) {
  if (const auto* ret = std::get_if<RetractDecoration>(&ds.decoration)) {
    const Index rx = ret->r[static_cast<std::size_t>(x)];
    if (rx != x && std::find(sub.begin(), sub.end(), rx) == sub.end()) return std::nullopt;
  }
  return extract_extension(ds, sub, x);
}

std::optional<Index> find_witness(const DecoratedSpace& ds, const std::vector<Index>& sub, const PointExtension& want) {
  for (Index x = 0; x < ds.size(); ++x) {
    if (std::find(sub.begin(), sub.end(), x) != sub.end()) continue;
    auto got = descriptor_of(ds, sub, x);
    if (got && *got == want) return x;
  }
  return std::nullopt;
}

DecoratedSpace normalized_seed(const DecoratedSpace& seed) {
  auto report = validate_decorated(seed);
  if (!report.ok())
    throw PreconditionError("seed does not validate: " + report.violations.front().rule);
  DecoratedSpace out = seed;
  if (const auto* con = std::get_if<ControlledDecoration>(&seed.decoration)) out.decoration = with_full_control(*con);
  return out;
}

}  // namespace

void check_budget(const EnumerationBudget& budget) {
  if (budget.max_points < 1 || budget.max_denominator < 1 || budget.max_value < 1)
    throw PreconditionError("budget bounds must all be at least 1");
}

std::vector<Rational> budget_grid(const EnumerationBudget& budget, bool with_zero) {
  check_budget(budget);
  std::vector<Rational> out;
  for (long q = 1; q <= budget.max_denominator; ++q) {
    const Rational top = budget.max_value * q;
    for (long p = 1; Rational(p) <= top; ++p)
      if (std::gcd(p, q) == 1) out.emplace_back(Rational(p) / q);
  }
  std::sort(out.begin(), out.end());
  if (with_zero) out.insert(out.begin(), Rational(0));
  return out;
}

bool within_budget(const PointExtension& ext, Index substructure_size, const EnumerationBudget& budget) {
  if (substructure_size + 1 > budget.max_points) return false;
  if (!all_on_grid(ext.profile, budget, false)) return false;
  return std::visit(
      [&](const auto& pe) -> bool {
        using T = std::decay_t<decltype(pe)>;
        if constexpr (std::is_same_v<T, RelationExtension>) {
          for (const auto& v : pe.values)
            if (!all_on_grid(v, budget, true)) return false;
          return true;
        } else if constexpr (std::is_same_v<T, RetractExtension>) {
          return on_grid(pe.p, budget, true);
        } else if constexpr (std::is_same_v<T, ControlledExtension>) {
          return all_on_grid(pe.values, budget, true);
        } else if constexpr (std::is_same_v<T, LipschitzExtension>) {
          return std::holds_alternative<Index>(pe.target);
        } else {
          return true;
        }
      },
      ext.payload);
}

std::vector<PointExtension> enumerate_one_point_extensions(const DecoratedSpace& ds, const EnumerationBudget& budget) {
  check_budget(budget);
  std::vector<PointExtension> out;
  if (ds.size() + 1 > budget.max_points) return out;
  DecoratedSpace work = ds;
  if (const auto* con = std::get_if<ControlledDecoration>(&ds.decoration)) work.decoration = with_full_control(*con);
  const auto grid = budget_grid(budget, false);
  for (auto& profile : katetov_profiles(work.space, grid)) {
    for (auto& payload : candidate_payloads(work, profile, budget)) {
      PointExtension ext{profile, std::move(payload)};
      if (!extension_violation(work, ext)) out.push_back(std::move(ext));
    }
  }
  return out;
}

void TaskQueue::add_stage(Index stage_index, const DecoratedSpace& stage) {
  for (auto& s : subsets_for_stage(stage, stage_index, budget_.max_points - 1)) {
    DecoratedSpace sub = restrict_decorated(stage, s);
    groups_.push_back({stage_index, std::move(s), std::move(sub)});
  }
}

void TaskQueue::fill() {
  while (ready_.empty() && !groups_.empty()) {
    Group g = std::move(groups_.front());
    groups_.pop_front();
    for (auto& d : enumerate_one_point_extensions(g.sub, budget_)) ready_.push_back({g.stage, g.subset, std::move(d)});
  }
}

std::optional<ExtensionTask> TaskQueue::next() {
  fill();
  if (ready_.empty()) return std::nullopt;
  ExtensionTask t = std::move(ready_.front());
  ready_.pop_front();
  return t;
}

bool TaskQueue::exhausted_through(Index stage) {
  fill();
  if (!ready_.empty()) return ready_.front().stage > stage;
  return groups_.empty() || groups_.front().stage > stage;
}

bool TaskQueue::empty() {
  fill();
  return ready_.empty();
}

ChainBuilder::ChainBuilder(const DecoratedSpace& seed, EnumerationBudget budget) : queue_(budget) {
  check_budget(budget);
  DecoratedSpace s = normalized_seed(seed);
  cert_.age = s.age();
  cert_.budget = budget;
  queue_.add_stage(0, s);
  chain_.stages.push_back(std::move(s));
}

std::string ChainBuilder::fresh_label() const {
  const DecoratedSpace& top = chain_.stages.back();
  std::string label = "u" + std::to_string(chain_.stages.size());
  while (top.space.contains(label)) label += "'";
  return label;
}

bool ChainBuilder::step() {
  while (auto task = queue_.next()) {
    const Index top_index = static_cast<Index>(chain_.stages.size()) - 1;
    const DecoratedSpace& top = chain_.stages.back();
    CertificateRecord rec;
    rec.seq = static_cast<Index>(cert_.records.size());
    rec.stage_enumerated = task->stage;
    rec.substructure = labels_of(top, task->subset);
    rec.descriptor = task->descriptor;
    if (auto w = find_witness(top, task->subset, task->descriptor)) {
      rec.realized_at_stage = top_index;
      rec.witness = top.space.label(*w);
      rec.fresh = false;
      cert_.records.push_back(std::move(rec));
      continue;
    }
    const DecoratedSpace sub = restrict_decorated(top, task->subset);
    const std::string label = fresh_label();
    const DecoratedSpace piece = build_extension(sub, task->descriptor, label);
    DecoratedAmalgam am = amalgamate_decorated(top, piece, sub, false);
    DecoratedSpace next = std::move(am.space);
    const Index x = next.size() - 1;
    if (next.size() != top.size() + 1 || next.space.label(x) != label)
      throw InternalError("realizing a task did not add exactly one point");
    VectorXq row(top.size());
    for (Index i = 0; i < top.size(); ++i) row(i) = next.space.d(i, x);
    if (auto v = katetov_violation(top.space, row)) throw InternalError("new stage is not a metric: " + v->detail);
    if (auto r = validate_decoration(next); !r.ok())
      throw InternalError("new stage violates " + r.violations.front().rule);
    if (!(restrict_decorated(next, [&] {
            std::vector<Index> id(static_cast<std::size_t>(top.size()));
            std::iota(id.begin(), id.end(), Index{0});
            return id;
          }()) == top))
      throw InternalError("new stage does not extend the previous one");
    if (!(descriptor_of(next, task->subset, x) == std::optional<PointExtension>(task->descriptor)))
      throw InternalError("new point does not realize its task");
    rec.realized_at_stage = top_index + 1;
    rec.witness = label;
    rec.fresh = true;
    cert_.records.push_back(std::move(rec));
    ++cert_.steps;
    chain_.stages.push_back(std::move(next));
    queue_.add_stage(top_index + 1, chain_.stages.back());
    return true;
  }
  return false;
}

GrowResult grow_chain(const DecoratedSpace& seed, const EnumerationBudget& budget, Index steps) {
  ChainBuilder b(seed, budget);
  for (Index i = 0; i < steps; ++i)
    if (!b.step()) break;
  return {b.chain(), b.certificate()};
}

GrowResult grow_until_exhausted(const DecoratedSpace& seed, const EnumerationBudget& budget, Index through_stage,
                                Index max_steps) {
  ChainBuilder b(seed, budget);
  for (Index i = 0; i < max_steps && !b.exhausted_through(through_stage); ++i)
    if (!b.step()) break;
  return {b.chain(), b.certificate()};
}

CertificateReport verify_certificate(const Chain& chain, const ChainCertificate& cert, const EnumerationBudget& budget,
                                     std::optional<Index> lag) {
  CertificateReport rep;
  auto fail = [&](std::optional<Index> seq, std::string msg) {
    rep.ok = false;
    rep.seq = seq;
    rep.message = std::move(msg);
    return rep;
  };
  if (chain.stages.empty()) throw StructuralError("chain has no stages");
  const Index len = static_cast<Index>(chain.stages.size());
  Index fresh = 0;
  for (const auto& r : cert.records) {
    if (r.fresh) ++fresh;
    if (r.realized_at_stage < 0 || r.realized_at_stage >= len)
      throw StructuralError("record " + std::to_string(r.seq) + " refers to stage " +
                            std::to_string(r.realized_at_stage) + " but the chain has " + std::to_string(len));
  }
  if (fresh != len - 1)
    throw StructuralError("certificate realizes " + std::to_string(fresh) + " new points but the chain has " +
                          std::to_string(len - 1));
  if (cert.steps != fresh) return fail(std::nullopt, "step count in the header does not match the log");
  if (!(cert.budget == budget)) return fail(std::nullopt, "certificate budget differs from the given budget");
  if (cert.schedule != "fifo") return fail(std::nullopt, "unknown schedule '" + cert.schedule + "'");
  for (Index k = 0; k < len; ++k) {
    const auto& st = chain.stages[static_cast<std::size_t>(k)];
    if (st.age() != cert.age) return fail(std::nullopt, "stage " + std::to_string(k) + " has the wrong class");
    if (k == 0) {
      if (auto r = validate_decorated(st); !r.ok()) return fail(std::nullopt, "first stage does not validate");
      continue;
    }
    const auto& prev = chain.stages[static_cast<std::size_t>(k - 1)];
    if (st.size() != prev.size() + 1) return fail(std::nullopt, "stage " + std::to_string(k) + " does not add one point");
    std::vector<Index> id(static_cast<std::size_t>(prev.size()));
    std::iota(id.begin(), id.end(), Index{0});
    bool same = false;
    try {
      same = restrict_decorated(st, id) == prev;
    } catch (const StructuralError&) {
    }
    if (!same) return fail(std::nullopt, "stage " + std::to_string(k - 1) + " is not a substructure of the next stage");
    if (auto r = validate_decorated(st); !r.ok())
      return fail(std::nullopt, "stage " + std::to_string(k) + " violates " + r.violations.front().rule);
  }

  TaskQueue replay(budget);
  replay.add_stage(0, chain.stages.front());
  Index top = 0;
  for (const auto& r : cert.records) {
    const std::string at = "record " + std::to_string(r.seq);
    if (r.seq != rep.records_checked) return fail(r.seq, at + ": sequence number out of order");
    auto task = replay.next();
    if (!task) return fail(r.seq, at + ": no task left to replay");
    const DecoratedSpace& cur = chain.stages[static_cast<std::size_t>(top)];
    if (task->stage != r.stage_enumerated || labels_of(cur, task->subset) != r.substructure)
      return fail(r.seq, at + ": task differs from the scheduled one");
    if (!(task->descriptor == r.descriptor)) return fail(r.seq, at + ": descriptor differs from the scheduled one");
    const Index want_stage = r.fresh ? top + 1 : top;
    if (r.realized_at_stage != want_stage) return fail(r.seq, at + ": realized at an unexpected stage");
    const DecoratedSpace& st = chain.stages[static_cast<std::size_t>(want_stage)];
    auto w = st.space.find(r.witness);
    if (!w) return fail(r.seq, at + ": unknown witness '" + r.witness + "'");
    if (r.fresh && *w != st.size() - 1) return fail(r.seq, at + ": fresh witness is not the new point");
    if (!r.fresh) {
      // An existing witness must be the first one found.
      auto first = find_witness(st, task->subset, task->descriptor);
      if (!first || *first != *w) return fail(r.seq, at + ": witness is not the first realization");
    }
    if (std::find(task->subset.begin(), task->subset.end(), *w) != task->subset.end())
      return fail(r.seq, at + ": witness lies in the substructure");
    auto got = descriptor_of(st, task->subset, *w);
    if (!got || !(*got == task->descriptor)) return fail(r.seq, at + ": witness does not realize the descriptor");
    if (r.fresh) {
      ++top;
      replay.add_stage(top, chain.stages[static_cast<std::size_t>(top)]);
    }
    ++rep.records_checked;
  }
  if (lag) {
    const Index due = len - 1 - *lag;
    if (due >= 0 && !replay.exhausted_through(due))
      return fail(std::nullopt, "a task enumerated at stage " + std::to_string(due) + " or earlier was never served");
  }
  while (replay.next()) ++rep.pending;
  return rep;
}

namespace {

PointExtension first_point_descriptor(const DecoratedSpace& target, Index x) { return extract_extension(target, {}, x); }

void require_in_budget(const DecoratedSpace& target, const EnumerationBudget& budget) {
  check_budget(budget);
  if (target.size() > budget.max_points)
    throw PreconditionError("target has more points than the budget allows");
  if (auto r = validate_decorated(target); !r.ok()) throw PreconditionError("target does not validate: " + r.violations.front().rule);
  for (Index x = 0; x < target.size(); ++x) {
    std::vector<Index> before(static_cast<std::size_t>(x));
    std::iota(before.begin(), before.end(), Index{0});
    auto d = descriptor_of(target, before, x);
    if (!d) throw PreconditionError("target points must be listed with each retraction image before its preimage");
    if (!within_budget(*d, x, budget))
      throw PreconditionError("point '" + target.space.label(x) + "' of the target lies outside the budget");
  }
}

}  // namespace

EmbedResult embed_structure(const DecoratedSpace& target, const Chain& chain, const EnumerationBudget& budget) {
  if (chain.stages.empty()) throw StructuralError("chain has no stages");
  DecoratedSpace tgt = target;
  if (const auto* con = std::get_if<ControlledDecoration>(&target.decoration)) tgt.decoration = with_full_control(*con);
  require_in_budget(tgt, budget);
  const DecoratedSpace& last = chain.stages.back();
  if (last.age() != tgt.age()) throw PreconditionError("target and chain belong to different classes");
  EmbedResult res;
  res.stage = static_cast<Index>(chain.stages.size()) - 1;
  const Index m = tgt.size();
  std::vector<Index> map;
  Index deepest = -1;
  std::function<bool()> dfs = [&]() -> bool {
    const Index k = static_cast<Index>(map.size());
    if (k == m) return true;
    std::vector<Index> before(static_cast<std::size_t>(k));
    std::iota(before.begin(), before.end(), Index{0});
    const PointExtension want = k == 0 ? first_point_descriptor(tgt, 0) : *descriptor_of(tgt, before, k);
    bool any = false;
    for (Index x = 0; x < last.size(); ++x) {
      if (std::find(map.begin(), map.end(), x) != map.end()) continue;
      auto got = descriptor_of(last, map, x);
      if (!got || !(*got == want)) continue;
      any = true;
      map.push_back(x);
      if (dfs()) return true;
      map.pop_back();
    }
    if (!any && k > deepest) {
      deepest = k;
      res.missing = {MissingTask{labels_of(last, map), want}};
    }
    return false;
  };
  if (dfs()) {
    res.map = map;
    res.missing.clear();
    if (!preserves_structure(tgt, last, map)) throw InternalError("embedding does not preserve the structure");
  }
  return res;
}

BackAndForthResult back_and_forth(const Chain& chain, const std::vector<std::pair<Index, Index>>& f, Index rounds,
                                  const EnumerationBudget& budget) {
  check_budget(budget);
  if (chain.stages.empty()) throw StructuralError("chain has no stages");
  const DecoratedSpace& last = chain.stages.back();
  std::vector<Index> dom, ran;
  for (const auto& [a, b] : f) {
    if (a < 0 || a >= last.size() || b < 0 || b >= last.size()) throw StructuralError("map refers to a point outside the last stage");
    dom.push_back(a);
    ran.push_back(b);
  }
  auto distinct = [](std::vector<Index> v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) == v.end();
  };
  if (!distinct(dom) || !distinct(ran)) throw PreconditionError("map is not injective");
  if (!dom.empty()) {
    if (!is_closed_substructure(last, dom) || !is_closed_substructure(last, ran))
      throw PreconditionError("domain and range must be closed substructures");
    if (!preserves_structure(restrict_decorated(last, dom), last, ran))
      throw PreconditionError("map is not a decoration-preserving isometry");
  }
  BackAndForthResult res;
  res.map = f;
  for (Index round = 0; round < rounds; ++round) {
    const bool forth = round % 2 == 0;
    std::vector<Index>& from = forth ? dom : ran;
    std::vector<Index>& to = forth ? ran : dom;
    std::optional<MissingTask> first_missing;
    bool extended = false;
    for (Index x = 0; x < last.size() && !extended; ++x) {
      if (std::find(from.begin(), from.end(), x) != from.end()) continue;
      auto want = descriptor_of(last, from, x);
      if (!want || !within_budget(*want, static_cast<Index>(from.size()), budget)) continue;
      if (auto y = find_witness(last, to, *want)) {
        from.push_back(x);
        to.push_back(*y);
        res.map.emplace_back(forth ? x : *y, forth ? *y : x);
        extended = true;
      } else if (!first_missing) {
        first_missing = MissingTask{labels_of(last, to), *want};
      }
    }
    if (!extended) {
      if (first_missing) {
        res.missing = {*first_missing};
        res.message = std::string(forth ? "forth" : "back") + " step needs growth";
      } else {
        res.message = std::string("no in-budget point outside the ") + (forth ? "domain" : "range");
      }
      return res;
    }
    std::vector<Index> d2, r2;
    for (const auto& [a, b] : res.map) {
      d2.push_back(a);
      r2.push_back(b);
    }
    if (!preserves_structure(restrict_decorated(last, d2), last, r2))
      throw InternalError("back-and-forth step broke the isometry");
    ++res.rounds_completed;
  }
  return res;
}

}  // namespace fraisse
