// Acceptance suite: one line per criterion, exit status 0 iff all pass.

#include "fraisse/cli.hpp"
#include "fraisse/json_io.hpp"
#include "generators.hpp"
#include "normed_generators.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <unistd.h>

using namespace fraisse;

namespace {

class Tally {
 public:
  void check(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && first_.empty()) first_ = what;
    if (!ok) ++failed_;
  }
  void note(std::string text) { note_ = std::move(text); }
  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::string s = std::to_string(checks_) + " checks";
    if (!note_.empty()) s += ", " + note_;
    if (failed_) s += ", " + std::to_string(failed_) + " failed (first: " + first_ + ")";
    return s;
  }

 private:
  long checks_ = 0, failed_ = 0;
  std::string first_, note_;
};

std::vector<Index> iota(Index n) {
  std::vector<Index> v(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
  return v;
}

// 1. Greatest amalgam: validity, hi endpoints, and a grid scan showing every
// larger value breaks a triangle through the base.
void greatest_amalgam(Tally& t) {
  std::mt19937_64 rng(1001);
  long pairs = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index nb = 1 + static_cast<Index>(rng() % 3);
    const Index nl = static_cast<Index>(rng() % static_cast<unsigned long>(6 - nb));
    const Index nr = static_cast<Index>(rng() % static_cast<unsigned long>(6 - nb));
    MetricSpace base = oracle::random_metric(rng, nb, 6, 4, "b");
    MetricSpace left = oracle::random_extension(rng, base, nl, "l", 6);
    MetricSpace right = oracle::random_extension(rng, base, nr, "r", 6);
    auto am = amalgamate_greatest(left, right, base);
    t.check(validate_metric(am.space).ok(), "amalgam is not a metric");
    for (Index i = nb; i < left.size(); ++i)
      for (Index j = nb; j < right.size(); ++j) {
        ++pairs;
        auto iv = admissible_interval(left, right, base, left.label(i), right.label(j));
        const Rational& d = am.space.d(am.left_map[static_cast<std::size_t>(i)], am.right_map[static_cast<std::size_t>(j)]);
        t.check(d == iv.hi, "cross distance below the hi endpoint");
        for (long q = 1; q <= 12; ++q)
          for (long k = 0;; ++k) {
            const Rational v(k, q);
            if (v > iv.hi + 1) break;
            if (v < iv.lo) continue;
            bool breaks = false, fits = true;
            for (Index b = 0; b < nb; ++b) {
              const Rational& x = left.d(i, left.index_of(base.label(b)));
              const Rational& y = right.d(j, right.index_of(base.label(b)));
              if (v > x + y) breaks = true;
              if (v > x + y || v < abs(Rational(x - y))) fits = false;
            }
            if (v > iv.hi) t.check(breaks, "value above hi admitted by every base triangle");
            else t.check(fits, "value inside the interval breaks a base triangle");
          }
      }
  }
  t.note(std::to_string(pairs) + " cross pairs");
}

// 2. Almost-one-point extensions: exact closeness bounds per class.
void almost_extensions(Tally& t) {
  std::mt19937_64 rng(1002);
  const auto k = gen::random_compact(rng, 3);
  const auto z = gen::random_target(rng, 3);
  for (int cls = 0; cls < 4; ++cls)
    for (int trial = 0; trial < 100; ++trial) {
      const Index n = 2 + trial % 4;
      DecoratedSpace ds = cls == 0   ? gen::random_age1(rng, n, {1, 2})
                          : cls == 1 ? gen::random_age2(rng, 1 + n / 2, n - 1 - n / 2)
                          : cls == 2 ? gen::random_age3(rng, n, k)
                                     : gen::random_age4(rng, n, z);
      const Rational eps = oracle::random_rational(rng, 1, 6);
      PointExtension abstract = cls == 3 && trial % 2 ? gen::near_target_descriptor(rng, ds, z.lipschitz * eps / (4 * (n + 1)))
                                                      : gen::random_descriptor(rng, ds);
      auto out = almost_one_point_extend(ds, abstract, eps);
      t.check(validate_decorated(out).ok(), "output fails validation");
      for (Index a = 0; a < n; ++a) t.check(abs(Rational(out.space.d(a, n) - abstract.profile(a))) < eps, "|d(a,b) - d(a,b')| >= eps");
      const PointExtension got = extract_extension(out, iota(n), n);
      if (cls == 0) {
        const auto& want = std::get<RelationExtension>(abstract.payload).values;
        const auto& have = std::get<RelationExtension>(got.payload).values;
        const auto& arities = std::get<RelationDecoration>(ds.decoration).arities;
        for (std::size_t r = 0; r < want.size(); ++r)
          for (Index c = 0; c < want[r].size(); ++c)
            t.check(abs(Rational(want[r](c) - have[r](c))) < eps * arities[r], "tuple bound");
      } else if (cls == 1) {
        t.check(std::get<RetractExtension>(got.payload).retract_to == std::get<RetractExtension>(abstract.payload).retract_to,
                "retraction target moved");
      } else if (cls == 2) {
        const auto& want = std::get<ControlledExtension>(abstract.payload).values;
        const auto& have = std::get<ControlledExtension>(got.payload).values;
        for (Index q = 0; q < want.size(); ++q) t.check(abs(Rational(want(q) - have(q))) <= eps, "proxy bound");
      } else {
        const auto& want = std::get<LipschitzExtension>(abstract.payload).target;
        const Index have = std::get<Index>(std::get<LipschitzExtension>(got.payload).target);
        const Rational dz = std::holds_alternative<Index>(want) ? z.space.d(std::get<Index>(want), have) : std::get<VectorXq>(want)(have);
        t.check(dz < z.lipschitz * eps, "target bound");
      }
    }
  t.note("400 instances");
}

DecoratedSpace age1_seed() {
  return {MetricSpace({"x0"}, MatrixXq::Zero(1, 1)), RelationDecoration{{1}, {VectorXq::Zero(1)}}};
}

const EnumerationBudget budget3{3, 2, 2};

GrowResult grown_through_first_two(const DecoratedSpace& seed) { return grow_until_exhausted(seed, budget3, 1, 10000); }

// 3. Finite-stage extension property over the first two stages.
void extension_property(Tally& t) {
  for (const DecoratedSpace& seed : {metric_only(MetricSpace({"x0"}, MatrixXq::Zero(1, 1))), age1_seed()}) {
    auto g = grown_through_first_two(seed);
    const Index len = static_cast<Index>(g.chain.stages.size());
    t.check(len >= 2, "chain did not grow");
    auto report = verify_certificate(g.chain, g.certificate, budget3, len - 2);
    t.check(report.ok, to_string(seed.age()) + ": " + report.message);
    t.check(report.records_checked == static_cast<Index>(g.certificate.records.size()), "records skipped");
  }
}

// 4. Every pair of embeddings of each budget structure with at most two
// points into an exhausted prefix completes a back-and-forth round in the
// last stage. Done for the chain of criterion 3 (prefix: stages 0 and 1) and
// for a deeper one (prefix: stages 0 to 3). Pairs landing on later points of
// the first chain are counted for information only: their tasks need not
// have been served yet.
void homogeneity(Tally& t) {
  std::vector<DecoratedSpace> small;
  for (const Rational& p : budget_grid(budget3, true)) {
    DecoratedSpace one{MetricSpace({"t0"}, MatrixXq::Zero(1, 1)), RelationDecoration{{1}, {VectorXq::Constant(1, p)}}};
    small.push_back(one);
    for (const auto& ext : enumerate_one_point_extensions(one, budget3)) small.push_back(build_extension(one, ext, "t1"));
  }
  auto pairs_of = [&](const Chain& chain, const DecoratedSpace& into, const std::function<void(bool, const std::string&)>& report) {
    for (const auto& s : small) {
      const auto embeddings = enumerate_decorated_embeddings(s, into);
      for (const auto& e1 : embeddings)
        for (const auto& e2 : embeddings) {
          std::vector<std::pair<Index, Index>> f;
          for (std::size_t i = 0; i < e1.size(); ++i) f.emplace_back(e1[i], e2[i]);
          auto r = back_and_forth(chain, f, 1, budget3);
          report(r.complete(1), r.message);
        }
    }
  };
  long pairs = 0, later = 0, later_ok = 0;
  auto required = [&](bool ok, const std::string& msg) {
    ++pairs;
    t.check(ok, "round not completed: " + msg);
  };
  auto g = grown_through_first_two(age1_seed());
  pairs_of(g.chain, g.chain.stages[1], required);
  pairs_of(g.chain, g.chain.stages.back(), [&](bool ok, const std::string&) {
    ++later;
    later_ok += ok;
  });
  auto deep = grow_until_exhausted(age1_seed(), budget3, 3, 10000);
  t.check(verify_certificate(deep.chain, deep.certificate, budget3, static_cast<Index>(deep.chain.stages.size()) - 4).ok,
          "deeper chain not exhausted through stage 3");
  pairs_of(deep.chain, deep.chain.stages[3], required);
  t.note(std::to_string(small.size()) + " structures, " + std::to_string(pairs) + " prefix embedding pairs; last stage (info): " +
         std::to_string(later_ok) + "/" + std::to_string(later) + " pairs complete");
}

// 5. Gauge LP against the Caratheodory oracle.
void gauge_oracle(Tally& t) {
  std::mt19937_64 rng(1005);
  for (int trial = 0; trial < 100; ++trial) {
    const Index dim = 1 + trial % 3;
    const Index extra = static_cast<Index>(rng() % static_cast<unsigned long>(7 - dim));
    auto s = gen::random_presentation(rng, dim, extra);
    for (int k = 0; k < 3; ++k) {
      VectorXq x = gen::small_vector(rng, dim, 3);
      auto want = oracle::caratheodory_gauge(s.generator_matrix(), s.norm_values(), x);
      t.check(want.has_value() && gauge_norm(s, x) == *want, "gauge differs from the oracle");
    }
  }
}

// 6. Normed amalgams keep both sides' gauges.
void normed_amalgams(Tally& t) {
  std::mt19937_64 rng(1006);
  for (int trial = 0; trial < 50; ++trial) {
    const Index b = 1 + trial % 2;
    auto base = gen::random_unit_normed(rng, b, 1);
    auto left = gen::isometric_extension(rng, base, 1 + static_cast<Index>(rng() % static_cast<unsigned long>(4 - b)), "l");
    auto right = gen::isometric_extension(rng, base, 1 + static_cast<Index>(rng() % static_cast<unsigned long>(4 - b)), "r");
    auto am = amalgamate_normed(left, right, base);
    for (const auto* side : {&left, &right}) {
      const MatrixXq e = embedding_matrix(side == &left ? am.left_map : am.right_map, am.space.dim());
      for (const auto& gnr : side->generators) t.check(gauge_norm(am.space, VectorXq(e * gnr.vec)) == gnr.norm, "generator value changed");
    }
  }
}

// 7. Amalgamation along eps-morphisms.
void eps_amalgams(Tally& t) {
  std::mt19937_64 rng(1007);
  long fallback = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Rational eps = trial % 2 ? Rational(1, 4) : Rational(1, 2);
    const Index nx = 1 + trial % 2;
    auto x = gen::random_unit_normed(rng, nx, 1);
    auto y = gen::random_unit_normed(rng, nx + static_cast<Index>(rng() % static_cast<unsigned long>(3 - nx)), 1);
    MatrixXq phi;
    bool found = false;
    for (int attempt = 0; attempt < 40 && !found; ++attempt) {
      phi = MatrixXq::Zero(y.dim(), nx);
      phi.topRows(nx) = MatrixXq::Identity(nx, nx);
      for (Index i = 0; i < y.dim(); ++i)
        for (Index j = 0; j < nx; ++j) phi(i, j) += Rational(static_cast<long>(rng() % 3) - 1, 8);
      if (rank<Rational>(phi) < nx) continue;
      found = check_eps_morphism({phi, eps}, x, y).ok();
    }
    if (!found) {
      ++fallback;
      y = x;
      phi = MatrixXq::Identity(nx, nx) * (1 + eps / 2);
    }
    auto am = amalgamate_eps_morphism(x, y, {phi, eps});
    t.check(am.iso_x.ok && !am.iso_x.sampled, "iota_X not exactly isometric");
    t.check(am.iso_y.ok && !am.iso_y.sampled, "iota_Y not exactly isometric");
    t.check(operator_norm(MatrixXq(am.iota_y * phi - am.iota_x), x, am.w) <= eps, "coupling above eps");
  }
  t.note(std::to_string(50 - fallback) + " random morphisms, " + std::to_string(fallback) + " scaled identities");
}

// 8. One-step extension: gate enforced, accepted calls are eps-isometric and
// keep the old stage.
void one_step(Tally& t) {
  std::mt19937_64 rng(1008);
  for (int trial = 0; trial < 25; ++trial) {
    const Index e = 1 + trial % 2;
    const Rational eps = trial % 3 == 0 ? Rational(1, 2) : Rational(1, 4);
    auto f = gen::random_unit_normed(rng, e + 1, 2);
    auto espace = subspace_presentation(f, e);
    auto current = gen::isometric_extension(rng, espace, 1, "c");
    const Rational delta = distance_to_subspace(f, unit_vector(e + 1, e), MatrixXq::Identity(e + 1, e));
    const Rational gate = gurarij_gate(eps, delta);
    MatrixXq phi = MatrixXq::Zero(current.dim(), e);
    phi.topRows(e) = MatrixXq::Identity(e, e) * (1 + gate / 4);
    bool rejected = false;
    try {
      gurarij_one_step_extend(current, f, phi, gate, eps);
    } catch (const PreconditionError&) {
      rejected = true;
    }
    t.check(rejected, "gate-violating call accepted");
    auto step = gurarij_one_step_extend(current, f, phi, gate / 2, eps);
    auto check = eps_isometry_check(step.extension, f, step.z, eps);
    t.check(check.ok && !check.sampled, "extension is not an eps-isometry");
    auto keep = eps_isometry_check(step.inclusion, current, step.z, 0);
    t.check(keep.ok && !keep.sampled, "old stage not preserved");
  }
}

// 9. Free norm: duality, lifts, point evaluations.
void free_space(Tally& t) {
  std::mt19937_64 rng(1009);
  auto molecule = [&](const PointedSpace& s) {
    Molecule m;
    for (const auto& l : s.space.labels())
      if (l != s.basepoint && rng() % 3) m.coeffs[l] = oracle::random_rational(rng, 3, 4) * (rng() % 2 ? 1 : -1);
    return m;
  };
  for (int trial = 0; trial < 100; ++trial) {
    auto s = make_pointed(oracle::random_metric(rng, 2 + trial % 5, 6), "p0");
    const Molecule m = molecule(s);
    t.check(free_norm(s, m).value == kantorovich_dual(s, m).value, "duality gap");
    for (Index x = 0; x < s.space.size(); ++x)
      for (Index y = 0; y < s.space.size(); ++y)
        if (x != y) t.check(free_norm(s, dirac_difference(s.space.label(x), s.space.label(y))).value == s.space.d(x, y), "delta_x - delta_y");
  }
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 2 + trial % 5, dim = 1 + trial % 3;
    auto s = make_pointed(oracle::random_metric(rng, n, 5), "p0");
    const Rational L = oracle::random_rational(rng, 3, 4);
    PointMap f;
    std::vector<Index> anchors;
    for (Index k = 0; k < dim; ++k) anchors.push_back(static_cast<Index>(rng() % static_cast<unsigned long>(n)));
    for (Index p = 0; p < n; ++p) {
      VectorXq v(dim);
      for (Index k = 0; k < dim; ++k) v(k) = (s.space.d(p, anchors[k]) - s.space.d(0, anchors[k])) * L / dim;
      f[s.space.label(p)] = v;
    }
    auto r = lift_check(s, l1_space(default_basis(dim)), f, L, {molecule(s), molecule(s)});
    t.check(r.ok(), "lift bound violated");
  }
}

// 10. Determinism of grow and exact round trips.
std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "fraisse");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

template <typename T, typename Read>
void round_trip(Tally& t, const T& value, Read read, const std::string& what) {
  const std::string text = dump_json(to_json(value));
  const T back = read(parse_json_text(text));
  t.check(back == value && dump_json(to_json(back)) == text, what + " round trip");
}

void determinism(Tally& t) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("fraisse_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::ofstream(dir / "seed.json") << dump_json(to_json(age1_seed()));
  for (const std::string cls : {"metric", "age1"})
    for (int run = 0; run < 2; ++run) {
      std::vector<std::string> args{"grow", "--class", cls, "--steps", "8", "--max-points", "3", "--max-denominator", "2", "--max-value", "2",
                                    "--out-chain", (dir / (cls + std::to_string(run) + ".json")).string(),
                                    "--out-cert", (dir / (cls + std::to_string(run) + ".jsonl")).string()};
      if (cls == "age1") args.insert(args.end(), {"--seed", (dir / "seed.json").string()});
      t.check(cli(args) == exit_ok, "grow failed");
    }
  for (const std::string cls : {"metric", "age1"}) {
    t.check(slurp(dir / (cls + "0.jsonl")) == slurp(dir / (cls + "1.jsonl")), cls + " certificates differ");
    t.check(slurp(dir / (cls + "0.json")) == slurp(dir / (cls + "1.json")), cls + " chains differ");
    t.check(cli({"verify", "--chain", (dir / (cls + "0.json")).string(), "--cert", (dir / (cls + "0.jsonl")).string()}) == exit_ok,
            cls + " certificate does not verify");
  }
  fs::remove_all(dir);

  std::mt19937_64 rng(1010);
  auto decorated = [](const Json& j) { return decorated_from_json(j); };
  const auto k = gen::random_compact(rng, 3);
  const auto z = gen::random_target(rng, 3);
  for (int trial = 0; trial < 10; ++trial) {
    round_trip(t, oracle::random_metric(rng, 1 + trial % 5, 7), [](const Json& j) { return metric_from_json(j); }, "metric");
    std::vector<DecoratedSpace> all{metric_only(oracle::random_metric(rng, 3, 5)), gen::random_age1(rng, 3, {1, 2}), gen::random_age2(rng, 2, 1),
                                    gen::random_age3(rng, 3, k), gen::random_age4(rng, 3, z)};
    for (const auto& ds : all) {
      round_trip(t, ds, decorated, to_string(ds.age()));
      const PointExtension ext = gen::random_descriptor(rng, ds);
      t.check(extension_from_json(parse_json_text(to_json(ext).dump()), "") == ext, "descriptor round trip");
    }
    auto s = gen::random_unit_normed(rng, 1 + trial % 3, 2);
    if (trial % 2) s.seminorm = gen::random_seminorm(rng, s);
    if (trial % 3 == 0) s.projection = ProjectionSpec{MatrixXq::Identity(s.dim(), s.dim())};
    round_trip(t, s, [](const Json& j) { return normed_from_json(j); }, "normed");
    auto p = make_pointed(oracle::random_metric(rng, 4, 3), "p1");
    round_trip(t, p, [](const Json& j) { return pointed_from_json(j); }, "pointed space");
    Molecule m;
    m.coeffs = {{"p0", oracle::random_rational(rng, 5, 7)}, {"p2", -oracle::random_rational(rng, 5, 7)}};
    round_trip(t, m, [](const Json& j) { return molecule_from_json(j); }, "molecule");
    PointMap f{{"p0", gen::small_vector(rng, 2)}, {"p3", gen::small_vector(rng, 2)}};
    t.check(point_map_from_json(parse_json_text(point_map_to_json(f).dump())) == f, "point map round trip");
  }
  auto g = grow_chain(age1_seed(), budget3, 6);
  const std::string cert = certificate_to_jsonl(g.certificate);
  t.check(certificate_to_jsonl(certificate_from_jsonl(cert)) == cert, "certificate round trip");
  const Chain back = chain_from_json(parse_json_text(chain_to_json(g.chain).dump()));
  t.check(back.stages == g.chain.stages, "chain round trip");
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<void(Tally&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "greatest-amalgam maximality", 30, greatest_amalgam},
      {2, "almost-one-point extension bounds", 30, almost_extensions},
      {3, "finite-stage extension property", 60, extension_property},
      {4, "finite homogeneity (back-and-forth)", 60, homogeneity},
      {5, "gauge LP vs Caratheodory oracle", 60, gauge_oracle},
      {6, "normed amalgamation isometry", 30, normed_amalgams},
      {7, "eps-morphism amalgamation", 60, eps_amalgams},
      {8, "one-step extension with parameter gate", 60, one_step},
      {9, "free-norm duality and lift", 60, free_space},
      {10, "determinism and round trips", 10, determinism},
  };
  int passed = 0;
  for (const auto& c : criteria) {
    Tally t;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(t);
    } catch (const std::exception& e) {
      t.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_s;
    const bool ok = t.ok() && in_time;
    passed += ok;
    std::ostringstream line;
    line.setf(std::ios::fixed);
    line.precision(2);
    line << (ok ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.name << " (" << t.summary() << "; " << secs << " s, limit "
         << c.limit_s << " s" << (in_time ? "" : ", TIME LIMIT EXCEEDED") << ")";
    std::cout << line.str() << std::endl;
  }
  std::cout << passed << "/" << criteria.size() << " criteria passed" << std::endl;
  return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
