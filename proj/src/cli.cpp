#include "fraisse/cli.hpp"

#include "fraisse/json_io.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace fraisse {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Readers report paths relative to the document; prefix them with the file.
template <typename F>
auto in_file(const std::string& file, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const FormatError& e) {
    throw FormatError(file + ":" + e.path(), std::string(e.what()).substr(e.path().size() + 2));
  }
}

Json read_json(const std::string& path) {
  const std::string text = read_file(path);
  return in_file(path, [&] { return parse_json_text(text); });
}

void write_text(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << text;
}

Rational parse_flag_rational(const std::string& flag, const std::string& text) {
  try {
    return parse_rational(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(flag + ": " + e.what());
  }
}

struct BudgetFlags {
  Index max_points = 3;
  long max_denominator = 2;
  std::string max_value = "2";

  void add(CLI::App* app) {
    app->add_option("--max-points", max_points, "Largest substructure plus new point")->capture_default_str();
    app->add_option("--max-denominator", max_denominator, "Largest denominator on the budget grid")->capture_default_str();
    app->add_option("--max-value", max_value, "Largest value on the budget grid")->capture_default_str();
  }
  EnumerationBudget budget() const { return {max_points, max_denominator, parse_flag_rational("--max-value", max_value)}; }
};

Json labels_json(const MetricSpace& s, const std::vector<Index>& idx) {
  Json out = Json::array();
  for (Index i : idx) out.push_back(s.label(i));
  return out;
}

Json missing_json(const std::vector<MissingTask>& missing) {
  Json out = Json::array();
  for (const auto& m : missing) out.push_back(to_json(m));
  return out;
}

int report_exit(bool ok) { return ok ? exit_ok : exit_failure; }

// validate

ValidationReport validate_chain(const Chain& chain) {
  ValidationReport r;
  for (std::size_t k = 0; k < chain.stages.size(); ++k) {
    for (auto v : validate_decorated(chain.stages[k]).violations) {
      v.witness.insert(v.witness.begin(), "stage " + std::to_string(k));
      r.violations.push_back(std::move(v));
    }
    if (k == 0) continue;
    const auto& prev = chain.stages[k - 1];
    const auto& cur = chain.stages[k];
    bool restricts = prev.size() <= cur.size() && prev.age() == cur.age();
    if (restricts) {
      std::vector<Index> head(static_cast<std::size_t>(prev.size()));
      for (Index i = 0; i < prev.size(); ++i) head[static_cast<std::size_t>(i)] = i;
      try {
        restricts = restrict_decorated(cur, head) == prev;
      } catch (const std::exception&) {
        restricts = false;
      }
    }
    if (!restricts) r.add("stage_restriction", {"stage " + std::to_string(k)}, "previous stage is not an initial substructure");
  }
  return r;
}

int cmd_validate(const std::string& file, bool unit_basis, std::ostream& out) {
  const Json doc = read_json(file);
  ValidationReport report;
  in_file(file, [&] {
    if (doc.is_array()) {
      report = validate_chain(chain_from_json(doc));
      return 0;
    }
    const std::string kind = kind_of(doc);
    if (kind == "metric_space")
      report = validate_metric(metric_from_json(doc));
    else if (kind == "age1" || kind == "age2" || kind == "age3" || kind == "age4")
      report = validate_decorated(decorated_from_json(doc));
    else if (kind == "normed")
      report = validate_partial_norm(normed_from_json(doc), unit_basis);
    else if (kind == "pointed_space")
      report = validate_metric(pointed_from_json(doc).space);
    else
      throw FormatError("/kind", kind.empty() ? "missing field" : "unknown kind '" + kind + "'");
    return 0;
  });
  out << dump_json(to_json(report));
  return report_exit(report.ok());
}

// amalgamate

int cmd_amalgamate(const std::string& base_file, const std::string& left_file, const std::string& right_file,
                   const std::string& out_file, std::ostream& out) {
  const Json base = read_json(base_file), left = read_json(left_file), right = read_json(right_file);
  const std::string kind = kind_of(left);
  if (kind_of(right) != kind || kind_of(base) != kind) throw UsageError("base, left and right must have the same kind");
  Json doc;
  if (kind == "normed") {
    auto b = in_file(base_file, [&] { return normed_from_json(base); });
    auto l = in_file(left_file, [&] { return normed_from_json(left); });
    auto r = in_file(right_file, [&] { return normed_from_json(right); });
    auto am = amalgamate_normed(l, r, b);
    doc = to_json(am.space);
    Json lm = Json::array(), rm = Json::array();
    for (Index i : am.left_map) lm.push_back(am.space.basis[static_cast<std::size_t>(i)]);
    for (Index i : am.right_map) rm.push_back(am.space.basis[static_cast<std::size_t>(i)]);
    doc["left_map"] = lm;
    doc["right_map"] = rm;
  } else {
    auto b = in_file(base_file, [&] { return decorated_from_json(base); });
    auto l = in_file(left_file, [&] { return decorated_from_json(left); });
    auto r = in_file(right_file, [&] { return decorated_from_json(right); });
    DecoratedAmalgam am = b.size() == 0 ? joint_embed_far_apart(l, r) : amalgamate_decorated(l, r, b);
    doc = to_json(am.space);
    doc["left_map"] = labels_json(am.space.space, am.left_map);
    doc["right_map"] = labels_json(am.space.space, am.right_map);
  }
  write_text(out, out_file, dump_json(doc));
  return exit_ok;
}

// grow / verify / embed / baf

struct GrowFlags {
  std::string age = "metric";
  std::string seed;
  Index steps = 0;
  std::optional<Index> exhaust;
  BudgetFlags budget;
  std::string out_chain, out_cert;
};

int cmd_grow(const GrowFlags& g, std::ostream& out) {
  AgeClass age;
  try {
    age = age_class_from_string(g.age);
  } catch (const StructuralError& e) {
    throw UsageError(std::string("--class: ") + e.what());
  }
  DecoratedSpace seed;
  if (g.seed.empty()) {
    if (age != AgeClass::metric) throw UsageError("--seed is required for class " + g.age);
    seed = metric_only(MetricSpace({"x0"}, MatrixXq::Zero(1, 1)));
  } else {
    const Json doc = read_json(g.seed);
    seed = in_file(g.seed, [&] { return decorated_from_json(doc); });
  }
  if (seed.age() != age) throw UsageError("seed has class " + to_string(seed.age()) + ", --class says " + g.age);
  const EnumerationBudget budget = g.budget.budget();
  GrowResult r = g.exhaust ? grow_until_exhausted(seed, budget, *g.exhaust, g.steps) : grow_chain(seed, budget, g.steps);
  const std::string chain_text = dump_json(chain_to_json(r.chain));
  const std::string cert_text = certificate_to_jsonl(r.certificate);
  if (!g.out_chain.empty()) write_text(out, g.out_chain, chain_text);
  if (!g.out_cert.empty()) write_text(out, g.out_cert, cert_text);
  if (g.out_chain.empty()) {
    out << chain_text;
  } else {
    Json summary;
    summary["stages"] = r.chain.stages.size();
    summary["points"] = r.chain.stages.back().space.labels();
    summary["records"] = r.certificate.records.size();
    summary["steps"] = r.certificate.steps;
    out << dump_json(summary);
  }
  return exit_ok;
}

Chain load_chain(const std::string& file) {
  const Json doc = read_json(file);
  Chain c = in_file(file, [&] { return chain_from_json(doc); });
  if (c.stages.empty()) throw UsageError("chain '" + file + "' has no stages");
  return c;
}

EnumerationBudget budget_for(const std::string& cert_file, const BudgetFlags& flags) {
  if (cert_file.empty()) return flags.budget();
  return in_file(cert_file, [&] { return certificate_from_jsonl(read_file(cert_file)).budget; });
}

int cmd_verify(const std::string& chain_file, const std::string& cert_file, std::optional<Index> lag, std::ostream& out) {
  Chain chain = load_chain(chain_file);
  ChainCertificate cert = in_file(cert_file, [&] { return certificate_from_jsonl(read_file(cert_file)); });
  auto report = verify_certificate(chain, cert, cert.budget, lag);
  out << dump_json(to_json(report));
  return report_exit(report.ok);
}

int cmd_embed(const std::string& target_file, const std::string& chain_file, const std::string& cert_file,
              const BudgetFlags& flags, std::ostream& out) {
  Chain chain = load_chain(chain_file);
  const Json doc = read_json(target_file);
  DecoratedSpace target = in_file(target_file, [&] { return decorated_from_json(doc); });
  auto r = embed_structure(target, chain, budget_for(cert_file, flags));
  Json j;
  j["ok"] = r.map.has_value();
  if (r.map) {
    j["map"] = Json::object();
    for (std::size_t i = 0; i < r.map->size(); ++i)
      j["map"][target.space.label(static_cast<Index>(i))] = chain.stages.back().space.label((*r.map)[i]);
  }
  j["stage"] = r.stage;
  j["missing"] = missing_json(r.missing);
  out << dump_json(j);
  return report_exit(r.map.has_value());
}

int cmd_baf(const std::string& chain_file, const std::string& map_file, Index rounds, const std::string& cert_file,
            const BudgetFlags& flags, std::ostream& out) {
  Chain chain = load_chain(chain_file);
  const Json doc = read_json(map_file);
  auto pairs = in_file(map_file, [&] { return pairs_from_json(doc); });
  const MetricSpace& last = chain.stages.back().space;
  std::vector<std::pair<Index, Index>> f;
  for (const auto& [a, b] : pairs) f.emplace_back(last.index_of(a), last.index_of(b));
  auto r = back_and_forth(chain, f, rounds, budget_for(cert_file, flags));
  Json j;
  j["complete"] = r.complete(rounds);
  j["rounds_completed"] = r.rounds_completed;
  j["pairs"] = Json::array();
  for (const auto& [a, b] : r.map) j["pairs"].push_back({last.label(a), last.label(b)});
  j["missing"] = missing_json(r.missing);
  if (!r.message.empty()) j["message"] = r.message;
  out << dump_json(j);
  return report_exit(r.complete(rounds));
}

// normed

PartialNormSpace load_normed(const std::string& file) {
  const Json doc = read_json(file);
  return in_file(file, [&] { return normed_from_json(doc); });
}

VectorXq parse_vector_flag(const std::string& text, Index dim) {
  VectorXq v;
  try {
    v = parse_rational_list(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--vector: ") + e.what());
  }
  if (v.size() != dim) throw UsageError("--vector has " + std::to_string(v.size()) + " entries, the space has dimension " + std::to_string(dim));
  return v;
}

int cmd_norm(const std::string& space_file, const std::string& vector, bool semi, bool json, std::ostream& out) {
  PartialNormSpace s = load_normed(space_file);
  const VectorXq x = parse_vector_flag(vector, s.dim());
  if (semi) {
    if (!s.seminorm) throw PreconditionError("space has no seminorm");
    const Rational v = seminorm_value(s, x);
    if (json)
      out << dump_json(Json{{"value", rational_to_json(v)}});
    else
      out << format_rational(v) << "\n";
    return exit_ok;
  }
  auto r = gauge_representation(s, x);
  if (json)
    out << dump_json(Json{{"value", rational_to_json(r.value)}, {"coefficients", vector_to_json(r.coefficients)}});
  else
    out << format_rational(r.value) << "\n";
  return exit_ok;
}

MatrixXq load_matrix(const std::string& file) {
  const Json doc = read_json(file);
  return in_file(file, [&] {
    if (doc.is_object()) return matrix_from_json(doc.contains("matrix") ? doc["matrix"] : doc, "/matrix");
    return matrix_from_json(doc, "");
  });
}

struct GurarijFlags {
  std::string current, pair, phi, eps, eps_prime, out;
  bool seminorm = false, projection = false;
};

int cmd_gurarij(const GurarijFlags& g, std::ostream& out) {
  PartialNormSpace current = load_normed(g.current), f = load_normed(g.pair);
  MatrixXq phi = load_matrix(g.phi);
  if (phi.size() == 0) phi = MatrixXq(current.dim(), f.dim() - 1);
  const Rational eps = parse_flag_rational("--eps", g.eps);
  Rational eps_prime;
  if (g.eps_prime.empty()) {
    // Half the gate.
    if (f.dim() < 1) throw StructuralError("the pair needs at least the vector v");
    const Rational delta = distance_to_subspace(f, unit_vector(f.dim(), f.dim() - 1), MatrixXq::Identity(f.dim(), f.dim() - 1));
    eps_prime = gurarij_gate(eps, delta) / 2;
  } else {
    eps_prime = parse_flag_rational("--eps-prime", g.eps_prime);
  }
  auto step = gurarij_one_step_extend(current, f, phi, eps_prime, eps, {g.seminorm, g.projection});
  Json j;
  j["kind"] = "gurarij_step";
  j["delta"] = rational_to_json(step.delta);
  j["gate"] = rational_to_json(step.gate);
  j["eps"] = rational_to_json(eps);
  j["eps_prime"] = rational_to_json(eps_prime);
  j["extension"] = matrix_to_json(step.extension);
  j["extension_check"] = to_json(step.extension_check);
  if (step.seminorm_check) j["seminorm_check"] = to_json(*step.seminorm_check);
  if (step.projection_report) j["projection_report"] = to_json(*step.projection_report);
  bool ok = step.extension_check.ok && (!step.seminorm_check || step.seminorm_check->ok) &&
            (!step.projection_report || step.projection_report->ok());
  j["ok"] = ok;
  if (g.out.empty()) {
    j["z"] = to_json(step.z);
  } else {
    write_text(out, g.out, dump_json(to_json(step.z)));
  }
  out << dump_json(j);
  return report_exit(ok);
}

// free space

PointedSpace load_pointed(const std::string& file) {
  const Json doc = read_json(file);
  return in_file(file, [&] { return pointed_from_json(doc); });
}

int cmd_free_norm(const std::string& space_file, const std::string& molecule_file, std::ostream& out) {
  PointedSpace s = load_pointed(space_file);
  const Json doc = read_json(molecule_file);
  Molecule m = in_file(molecule_file, [&] { return molecule_from_json(doc); });
  auto primal = free_norm(s, m);
  auto dual = kantorovich_dual(s, m);
  Json j;
  j["value"] = rational_to_json(primal.value);
  j["flow"] = Json::array();
  for (const auto& e : primal.flow)
    j["flow"].push_back({{"from", s.space.label(e.from)}, {"to", s.space.label(e.to)}, {"amount", rational_to_json(e.amount)}});
  j["dual"] = rational_to_json(dual.value);
  j["lipschitz_witness"] = Json::object();
  for (Index p = 0; p < s.space.size(); ++p) j["lipschitz_witness"][s.space.label(p)] = rational_to_json(dual.f(p));
  out << dump_json(j);
  return exit_ok;
}

int cmd_lift_check(const std::string& space_file, const std::string& target_file, const std::string& map_file,
                   const std::string& lipschitz, const std::string& molecules_file, std::ostream& out, std::ostream& err) {
  PointedSpace s = load_pointed(space_file);
  PartialNormSpace target = load_normed(target_file);
  const Json map_doc = read_json(map_file);
  PointMap f = in_file(map_file, [&] { return point_map_from_json(map_doc); });
  const Json mol_doc = read_json(molecules_file);
  auto molecules = in_file(molecules_file, [&] { return molecules_from_json(mol_doc); });
  auto report = lift_check(s, target, f, parse_flag_rational("--lipschitz", lipschitz), molecules);
  out << dump_json(to_json(report));
  if (!report.ok()) {
    err << "lift bound violated on molecule " << report.violations.front() << "\n";
    return exit_internal;
  }
  return exit_ok;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite stages of Fraisse limits over exact rationals", "fraisse"};
  app.require_subcommand(1);

  std::string file;
  bool unit_basis = false;
  auto* validate = app.add_subcommand("validate", "Check a structure against its axioms");
  validate->add_option("file", file, "JSON document")->required();
  validate->add_flag("--unit-basis", unit_basis, "Normed spaces: also require basis vectors of norm 1");

  std::string base, left, right, out_file;
  auto* amalgamate = app.add_subcommand("amalgamate", "Greatest amalgam of two structures over a base");
  amalgamate->add_option("--base", base)->required();
  amalgamate->add_option("--left", left)->required();
  amalgamate->add_option("--right", right)->required();
  amalgamate->add_option("--out", out_file);

  GrowFlags gf;
  Index exhaust = -1;
  auto* grow = app.add_subcommand("grow", "Grow a chain by fair realization of extension tasks");
  grow->add_option("--class", gf.age, "metric, age1, age2, age3 or age4")->capture_default_str();
  grow->add_option("--seed", gf.seed, "Seed structure (default: one point, metric class only)");
  grow->add_option("--steps", gf.steps, "Number of new points")->required();
  grow->add_option("--exhaust-through", exhaust, "Stop once every task of this stage and earlier is served (--steps bounds it)");
  gf.budget.add(grow);
  grow->add_option("--out-chain", gf.out_chain);
  grow->add_option("--out-cert", gf.out_cert);

  std::string chain_file, cert_file;
  Index lag = -1;
  auto* verify = app.add_subcommand("verify", "Replay a certificate against a chain");
  verify->add_option("--chain", chain_file)->required();
  verify->add_option("--cert", cert_file)->required();
  verify->add_option("--lag", lag, "Also require every task this many stages old to be served");

  std::string target_file;
  BudgetFlags bf;
  auto* embed = app.add_subcommand("embed", "Embed a finite structure into the last stage of a chain");
  embed->add_option("--target", target_file)->required();
  embed->add_option("--chain", chain_file)->required();
  embed->add_option("--cert", cert_file, "Take the budget from this certificate");
  bf.add(embed);

  std::string map_file;
  Index rounds = 1;
  auto* baf = app.add_subcommand("baf", "Back-and-forth extension of a partial isomorphism");
  baf->add_option("--chain", chain_file)->required();
  baf->add_option("--map", map_file)->required();
  baf->add_option("--rounds", rounds)->capture_default_str();
  baf->add_option("--cert", cert_file, "Take the budget from this certificate");
  bf.add(baf);

  std::string space_file, vector;
  bool json = false;
  auto* norm = app.add_subcommand("norm", "Gauge norm of a vector");
  auto* seminorm = app.add_subcommand("seminorm", "Seminorm of a vector");
  for (auto* sub : {norm, seminorm}) {
    sub->add_option("--space", space_file)->required();
    sub->add_option("--vector", vector, "Comma-separated rationals")->required();
    sub->add_flag("--json", json, "Print a JSON object instead of the bare value");
  }

  GurarijFlags gg;
  auto* gstep = app.add_subcommand("gurarij-step", "Extend an almost isometric embedding by one vector");
  gstep->add_option("--current", gg.current)->required();
  gstep->add_option("--pair", gg.pair, "Normed space E + v, v the last basis vector")->required();
  gstep->add_option("--phi", gg.phi, "Matrix of the eps'-isometry E -> current")->required();
  gstep->add_option("--eps", gg.eps)->required();
  gstep->add_option("--eps-prime", gg.eps_prime, "Default: half the gate");
  gstep->add_flag("--seminorm", gg.seminorm);
  gstep->add_flag("--projection", gg.projection);
  gstep->add_option("--out", gg.out, "Write the extended space here");

  std::string molecule_file, lipschitz, molecules_file;
  auto* fnorm = app.add_subcommand("free-norm", "Lipschitz-free norm of a molecule");
  fnorm->add_option("--space", space_file)->required();
  fnorm->add_option("--molecule", molecule_file)->required();

  auto* lift = app.add_subcommand("lift-check", "Check ||Phi(m)|| <= L ||m|| for the linear extension of F");
  lift->add_option("--space", space_file)->required();
  lift->add_option("--target", target_file)->required();
  lift->add_option("--map", map_file)->required();
  lift->add_option("--lipschitz", lipschitz)->required();
  lift->add_option("--molecules", molecules_file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*validate) return cmd_validate(file, unit_basis, out);
    if (*amalgamate) return cmd_amalgamate(base, left, right, out_file, out);
    if (*grow) {
      if (exhaust >= 0) gf.exhaust = exhaust;
      return cmd_grow(gf, out);
    }
    if (*verify) return cmd_verify(chain_file, cert_file, lag >= 0 ? std::optional<Index>(lag) : std::nullopt, out);
    if (*embed) return cmd_embed(target_file, chain_file, cert_file, bf, out);
    if (*baf) return cmd_baf(chain_file, map_file, rounds, cert_file, bf, out);
    if (*norm) return cmd_norm(space_file, vector, false, json, out);
    if (*seminorm) return cmd_norm(space_file, vector, true, json, out);
    if (*gstep) return cmd_gurarij(gg, out);
    if (*fnorm) return cmd_free_norm(space_file, molecule_file, out);
    if (*lift) return cmd_lift_check(space_file, target_file, map_file, lipschitz, molecules_file, out, err);
  } catch (const FormatError& e) {
    err << "format error at " << e.what() << "\n";
    return exit_usage;
  } catch (const StructuralError& e) {
    err << "structural error: " << e.what() << "\n";
    return exit_usage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const PreconditionError& e) {
    err << "precondition failed: " << e.what() << "\n";
    return exit_failure;
  } catch (const InternalError& e) {
    err << "internal invariant breach: " << e.what() << "\n";
    return exit_internal;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_internal;
  }
  return exit_usage;
}

}  // namespace fraisse
