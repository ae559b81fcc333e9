#include "fraisse/json_io.hpp"

#include <sstream>

namespace fraisse {

namespace {

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string child(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

const Json& object_at(const Json& doc, const std::string& path) {
  if (!doc.is_object()) throw FormatError(path.empty() ? "/" : path, "expected an object");
  return doc;
}

const Json& field(const Json& doc, const std::string& key, const std::string& path) {
  object_at(doc, path);
  auto it = doc.find(key);
  if (it == doc.end()) throw FormatError(child(path, key), "missing field");
  return *it;
}

const Json* optional_field(const Json& doc, const std::string& key) {
  auto it = doc.find(key);
  return it == doc.end() || it->is_null() ? nullptr : &*it;
}

const Json& array_at(const Json& node, const std::string& path) {
  if (!node.is_array()) throw FormatError(path, "expected an array");
  return node;
}

std::string string_from(const Json& node, const std::string& path) {
  if (!node.is_string()) throw FormatError(path, "expected a string");
  return node.get<std::string>();
}

long integer_from(const Json& node, const std::string& path) {
  if (!node.is_number_integer()) throw FormatError(path, "expected an integer");
  return node.get<long>();
}

bool bool_from(const Json& node, const std::string& path) {
  if (!node.is_boolean()) throw FormatError(path, "expected true or false");
  return node.get<bool>();
}

std::vector<std::string> strings_from(const Json& node, const std::string& path) {
  array_at(node, path);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < node.size(); ++i) out.push_back(string_from(node[i], child(path, i)));
  return out;
}

std::vector<Index> indices_from(const Json& node, const std::string& path) {
  array_at(node, path);
  std::vector<Index> out;
  for (std::size_t i = 0; i < node.size(); ++i) out.push_back(integer_from(node[i], child(path, i)));
  return out;
}

Index label_index(const MetricSpace& space, const Json& node, const std::string& path) {
  const std::string label = string_from(node, path);
  auto i = space.find(label);
  if (!i) throw FormatError(path, "unknown point '" + label + "'");
  return *i;
}

Json labels_to_json(const MetricSpace& space, const std::vector<Index>& idx) {
  Json out = Json::array();
  for (Index i : idx) out.push_back(space.label(i));
  return out;
}

void expect_kind(const Json& doc, const std::string& path, std::initializer_list<const char*> kinds) {
  const Json* k = doc.is_object() ? optional_field(doc, "kind") : nullptr;
  if (!k) return;
  const std::string kind = string_from(*k, child(path, "kind"));
  for (const char* want : kinds)
    if (kind == want) return;
  throw FormatError(child(path, "kind"), "unexpected kind '" + kind + "'");
}

Json proxy_to_json(const char* kind, const MetricSpace& space, const char* key, const Rational& value) {
  Json out;
  out["kind"] = kind;
  out["space"] = to_json(space);
  out[key] = rational_to_json(value);
  return out;
}

}  // namespace

Json parse_json_text(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw FormatError("/", std::string("invalid JSON: ") + e.what());
  }
}

std::string dump_json(const Json& doc) { return doc.dump(2) + "\n"; }

std::string kind_of(const Json& doc) {
  if (!doc.is_object()) return "";
  auto it = doc.find("kind");
  return it != doc.end() && it->is_string() ? it->get<std::string>() : "";
}

Json rational_to_json(const Rational& x) { return format_rational(x); }

Rational rational_from_json(const Json& node, const std::string& path) {
  const std::string text = string_from(node, path);
  try {
    return parse_rational(text);
  } catch (const std::invalid_argument& e) {
    throw FormatError(path, e.what());
  }
}

Json vector_to_json(const VectorXq& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(rational_to_json(v(i)));
  return out;
}

VectorXq vector_from_json(const Json& node, const std::string& path) {
  array_at(node, path);
  VectorXq out(static_cast<Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) out(static_cast<Index>(i)) = rational_from_json(node[i], child(path, i));
  return out;
}

Json matrix_to_json(const MatrixXq& m) {
  Json out = Json::array();
  for (Index i = 0; i < m.rows(); ++i) out.push_back(vector_to_json(m.row(i).transpose()));
  return out;
}

MatrixXq matrix_from_json(const Json& node, const std::string& path) {
  array_at(node, path);
  if (node.empty()) return MatrixXq(0, 0);
  const std::size_t cols = array_at(node[0], child(path, 0)).size();
  MatrixXq out(static_cast<Index>(node.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < node.size(); ++i) {
    VectorXq row = vector_from_json(node[i], child(path, i));
    if (static_cast<std::size_t>(row.size()) != cols) throw FormatError(child(path, i), "ragged matrix row");
    out.row(static_cast<Index>(i)) = row.transpose();
  }
  return out;
}

Json to_json(const MetricSpace& space) {
  Json out;
  out["kind"] = "metric_space";
  out["points"] = space.labels();
  out["dist"] = matrix_to_json(space.dist());
  return out;
}

MetricSpace metric_from_json(const Json& doc, const std::string& path) {
  expect_kind(doc, path, {"metric_space"});
  auto points = strings_from(field(doc, "points", path), child(path, "points"));
  MatrixXq dist = matrix_from_json(field(doc, "dist", path), child(path, "dist"));
  if (points.empty() && dist.size() == 0) return MetricSpace({}, MatrixXq(0, 0));
  if (dist.rows() != static_cast<Index>(points.size()) || dist.cols() != dist.rows())
    throw FormatError(child(path, "dist"), "distance matrix must be " + std::to_string(points.size()) + "x" +
                                               std::to_string(points.size()));
  return MetricSpace(std::move(points), std::move(dist));
}

Json to_json(const DecoratedSpace& ds) {
  if (ds.age() == AgeClass::metric) return to_json(ds.space);
  Json out;
  out["kind"] = to_string(ds.age());
  out["space"] = to_json(ds.space);
  Json dec;
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, RelationDecoration>) {
          dec["relations"] = Json::array();
          for (std::size_t i = 0; i < d.arities.size(); ++i)
            dec["relations"].push_back({{"arity", d.arities[i]}, {"values", vector_to_json(d.values[i])}});
        } else if constexpr (std::is_same_v<T, RetractDecoration>) {
          dec["p"] = vector_to_json(d.p);
          dec["r"] = labels_to_json(ds.space, d.r);
        } else if constexpr (std::is_same_v<T, ControlledDecoration>) {
          dec["control"] = labels_to_json(d.proxy.space, d.control);
          dec["values"] = matrix_to_json(d.values);
          out["target"] = proxy_to_json("compact_proxy", d.proxy.space, "net_radius", d.proxy.net_radius);
        } else {
          dec["assignment"] = labels_to_json(d.target.space, d.assignment);
          out["target"] = proxy_to_json("target_proxy", d.target.space, "lipschitz", d.target.lipschitz);
        }
      },
      ds.decoration);
  out["decoration"] = std::move(dec);
  if (out.contains("target")) {
    // Keep "target" last for readability.
    Json t = out["target"];
    out.erase("target");
    out["target"] = std::move(t);
  }
  return out;
}

DecoratedSpace decorated_from_json(const Json& doc, const std::string& path) {
  object_at(doc, path);
  const std::string kind = kind_of(doc);
  if (kind == "metric_space") return metric_only(metric_from_json(doc, path));
  if (kind != "age1" && kind != "age2" && kind != "age3" && kind != "age4") {
    if (kind.empty()) throw FormatError(child(path, "kind"), "missing field");
    throw FormatError(child(path, "kind"), "unknown kind '" + kind + "'");
  }
  DecoratedSpace ds;
  const std::string sp = child(path, "space"), dp = child(path, "decoration"), tp = child(path, "target");
  ds.space = metric_from_json(field(doc, "space", path), sp);
  const Json& dec = object_at(field(doc, "decoration", path), dp);
  if (kind == "age1") {
    RelationDecoration d;
    const std::string rp = child(dp, "relations");
    const Json& rels = array_at(field(dec, "relations", dp), rp);
    for (std::size_t i = 0; i < rels.size(); ++i) {
      d.arities.push_back(static_cast<int>(integer_from(field(rels[i], "arity", child(rp, i)), child(child(rp, i), "arity"))));
      d.values.push_back(vector_from_json(field(rels[i], "values", child(rp, i)), child(child(rp, i), "values")));
    }
    ds.decoration = std::move(d);
  } else if (kind == "age2") {
    RetractDecoration d;
    d.p = vector_from_json(field(dec, "p", dp), child(dp, "p"));
    const Json& r = array_at(field(dec, "r", dp), child(dp, "r"));
    for (std::size_t i = 0; i < r.size(); ++i) d.r.push_back(label_index(ds.space, r[i], child(child(dp, "r"), i)));
    ds.decoration = std::move(d);
  } else if (kind == "age3") {
    ControlledDecoration d;
    const Json& t = field(doc, "target", path);
    expect_kind(t, tp, {"compact_proxy"});
    d.proxy.space = metric_from_json(field(t, "space", tp), child(tp, "space"));
    d.proxy.net_radius = rational_from_json(field(t, "net_radius", tp), child(tp, "net_radius"));
    const Json& c = array_at(field(dec, "control", dp), child(dp, "control"));
    for (std::size_t i = 0; i < c.size(); ++i) d.control.push_back(label_index(d.proxy.space, c[i], child(child(dp, "control"), i)));
    d.values = matrix_from_json(field(dec, "values", dp), child(dp, "values"));
    if (d.values.size() == 0) d.values = MatrixXq(ds.space.size(), static_cast<Index>(d.control.size()));
    ds.decoration = std::move(d);
  } else {
    LipschitzDecoration d;
    const Json& t = field(doc, "target", path);
    expect_kind(t, tp, {"target_proxy"});
    d.target.space = metric_from_json(field(t, "space", tp), child(tp, "space"));
    d.target.lipschitz = rational_from_json(field(t, "lipschitz", tp), child(tp, "lipschitz"));
    const Json& a = array_at(field(dec, "assignment", dp), child(dp, "assignment"));
    for (std::size_t i = 0; i < a.size(); ++i)
      d.assignment.push_back(label_index(d.target.space, a[i], child(child(dp, "assignment"), i)));
    ds.decoration = std::move(d);
  }
  check_decoration_shape(ds);
  return ds;
}

Json to_json(const PointExtension& ext) {
  Json out;
  out["profile"] = vector_to_json(ext.profile);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RelationExtension>) {
          out["relations"] = Json::array();
          for (const auto& v : p.values) out["relations"].push_back(vector_to_json(v));
        } else if constexpr (std::is_same_v<T, RetractExtension>) {
          out["p"] = rational_to_json(p.p);
          out["retract_to"] = p.retract_to ? Json(*p.retract_to) : Json(nullptr);
        } else if constexpr (std::is_same_v<T, ControlledExtension>) {
          out["values"] = vector_to_json(p.values);
        } else if constexpr (std::is_same_v<T, LipschitzExtension>) {
          if (const auto* i = std::get_if<Index>(&p.target))
            out["target"] = *i;
          else
            out["target_distances"] = vector_to_json(std::get<VectorXq>(p.target));
        }
      },
      ext.payload);
  return out;
}

PointExtension extension_from_json(const Json& doc, const std::string& path) {
  PointExtension ext;
  ext.profile = vector_from_json(field(doc, "profile", path), child(path, "profile"));
  if (doc.contains("relations")) {
    RelationExtension r;
    const std::string rp = child(path, "relations");
    const Json& rels = array_at(doc["relations"], rp);
    for (std::size_t i = 0; i < rels.size(); ++i) r.values.push_back(vector_from_json(rels[i], child(rp, i)));
    ext.payload = std::move(r);
  } else if (doc.contains("p")) {
    RetractExtension r;
    r.p = rational_from_json(doc["p"], child(path, "p"));
    if (const Json* t = optional_field(doc, "retract_to")) r.retract_to = integer_from(*t, child(path, "retract_to"));
    ext.payload = std::move(r);
  } else if (doc.contains("values")) {
    ext.payload = ControlledExtension{vector_from_json(doc["values"], child(path, "values"))};
  } else if (doc.contains("target")) {
    ext.payload = LipschitzExtension{Index{integer_from(doc["target"], child(path, "target"))}};
  } else if (doc.contains("target_distances")) {
    ext.payload = LipschitzExtension{vector_from_json(doc["target_distances"], child(path, "target_distances"))};
  }
  return ext;
}

Json to_json(const EnumerationBudget& budget) {
  Json out;
  out["max_points"] = budget.max_points;
  out["max_denominator"] = budget.max_denominator;
  out["max_value"] = rational_to_json(budget.max_value);
  return out;
}

EnumerationBudget budget_from_json(const Json& doc, const std::string& path) {
  EnumerationBudget b;
  b.max_points = integer_from(field(doc, "max_points", path), child(path, "max_points"));
  b.max_denominator = integer_from(field(doc, "max_denominator", path), child(path, "max_denominator"));
  b.max_value = rational_from_json(field(doc, "max_value", path), child(path, "max_value"));
  return b;
}

Json chain_to_json(const Chain& chain) {
  Json out = Json::array();
  for (const auto& s : chain.stages) out.push_back(to_json(s));
  return out;
}

Chain chain_from_json(const Json& doc, const std::string& path) {
  array_at(doc, path.empty() ? "/" : path);
  Chain c;
  for (std::size_t i = 0; i < doc.size(); ++i) c.stages.push_back(decorated_from_json(doc[i], child(path, i)));
  return c;
}

std::string certificate_to_jsonl(const ChainCertificate& cert) {
  std::string out;
  Json header;
  header["kind"] = "certificate";
  header["age"] = to_string(cert.age);
  header["budget"] = to_json(cert.budget);
  header["schedule"] = cert.schedule;
  header["steps"] = cert.steps;
  out += header.dump() + "\n";
  for (const auto& r : cert.records) {
    Json line;
    line["seq"] = r.seq;
    line["stage_enumerated"] = r.stage_enumerated;
    line["substructure"] = r.substructure;
    line["descriptor"] = to_json(r.descriptor);
    line["realized_at_stage"] = r.realized_at_stage;
    line["witness"] = r.witness;
    line["fresh"] = r.fresh;
    out += line.dump() + "\n";
  }
  return out;
}

ChainCertificate certificate_from_jsonl(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  ChainCertificate cert;
  std::size_t n = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    const std::string path = "/" + std::to_string(n++);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json doc;
    try {
      doc = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw FormatError(path, std::string("invalid JSON: ") + e.what());
    }
    if (!seen_header) {
      expect_kind(doc, path, {"certificate"});
      if (kind_of(doc) != "certificate") throw FormatError(child(path, "kind"), "first line must be the certificate header");
      try {
        cert.age = age_class_from_string(string_from(field(doc, "age", path), child(path, "age")));
      } catch (const StructuralError& e) {
        throw FormatError(child(path, "age"), e.what());
      }
      cert.budget = budget_from_json(field(doc, "budget", path), child(path, "budget"));
      cert.schedule = string_from(field(doc, "schedule", path), child(path, "schedule"));
      cert.steps = integer_from(field(doc, "steps", path), child(path, "steps"));
      seen_header = true;
      continue;
    }
    CertificateRecord r;
    r.seq = integer_from(field(doc, "seq", path), child(path, "seq"));
    r.stage_enumerated = integer_from(field(doc, "stage_enumerated", path), child(path, "stage_enumerated"));
    r.substructure = strings_from(field(doc, "substructure", path), child(path, "substructure"));
    r.descriptor = extension_from_json(field(doc, "descriptor", path), child(path, "descriptor"));
    r.realized_at_stage = integer_from(field(doc, "realized_at_stage", path), child(path, "realized_at_stage"));
    r.witness = string_from(field(doc, "witness", path), child(path, "witness"));
    r.fresh = bool_from(field(doc, "fresh", path), child(path, "fresh"));
    cert.records.push_back(std::move(r));
  }
  if (!seen_header) throw FormatError("/0", "empty certificate");
  return cert;
}

Json to_json(const PartialNormSpace& space) {
  Json out;
  out["kind"] = "normed";
  out["dim"] = space.dim();
  out["basis"] = space.basis;
  out["generators"] = Json::array();
  for (const auto& g : space.generators) out["generators"].push_back({{"vec", vector_to_json(g.vec)}, {"norm", rational_to_json(g.norm)}});
  if (space.seminorm) out["seminorm"] = {{"values", vector_to_json(Eigen::Map<const VectorXq>(space.seminorm->values.data(),
                                                                                              static_cast<Index>(space.seminorm->values.size())))}};
  if (space.projection) out["projection"] = {{"matrix", matrix_to_json(space.projection->matrix)}};
  return out;
}

PartialNormSpace normed_from_json(const Json& doc, const std::string& path) {
  object_at(doc, path);
  if (kind_of(doc) != "normed") {
    if (kind_of(doc).empty()) throw FormatError(child(path, "kind"), "missing field");
    throw FormatError(child(path, "kind"), "unknown kind '" + kind_of(doc) + "'");
  }
  PartialNormSpace s;
  s.basis = strings_from(field(doc, "basis", path), child(path, "basis"));
  const Index dim = integer_from(field(doc, "dim", path), child(path, "dim"));
  if (dim != static_cast<Index>(s.basis.size()))
    throw FormatError(child(path, "dim"), "dim is " + std::to_string(dim) + " but the basis has " + std::to_string(s.basis.size()) + " labels");
  const std::string gp = child(path, "generators");
  const Json& gens = array_at(field(doc, "generators", path), gp);
  for (std::size_t i = 0; i < gens.size(); ++i) {
    Generator g{vector_from_json(field(gens[i], "vec", child(gp, i)), child(child(gp, i), "vec")),
                rational_from_json(field(gens[i], "norm", child(gp, i)), child(child(gp, i), "norm"))};
    if (g.vec.size() != dim) throw FormatError(child(child(gp, i), "vec"), "expected " + std::to_string(dim) + " entries");
    s.generators.push_back(std::move(g));
  }
  if (const Json* sm = optional_field(doc, "seminorm")) {
    const std::string sp = child(path, "seminorm");
    VectorXq v = vector_from_json(field(*sm, "values", sp), child(sp, "values"));
    if (static_cast<std::size_t>(v.size()) != s.generators.size())
      throw FormatError(child(sp, "values"), "expected one value per generator");
    s.seminorm = SeminormSpec{std::vector<Rational>(v.begin(), v.end())};
  }
  if (const Json* pr = optional_field(doc, "projection")) {
    const std::string pp = child(path, "projection");
    MatrixXq m = matrix_from_json(field(*pr, "matrix", pp), child(pp, "matrix"));
    if (m.rows() != dim || m.cols() != dim) throw FormatError(child(pp, "matrix"), "projection must be dim x dim");
    s.projection = ProjectionSpec{std::move(m)};
  }
  return s;
}

Json to_json(const PointedSpace& space) {
  Json out;
  out["kind"] = "pointed_space";
  out["space"] = to_json(space.space);
  out["basepoint"] = space.basepoint;
  return out;
}

PointedSpace pointed_from_json(const Json& doc, const std::string& path) {
  expect_kind(doc, path, {"pointed_space"});
  MetricSpace s = metric_from_json(field(doc, "space", path), child(path, "space"));
  const std::string base = string_from(field(doc, "basepoint", path), child(path, "basepoint"));
  if (!s.contains(base)) throw FormatError(child(path, "basepoint"), "unknown point '" + base + "'");
  return make_pointed(std::move(s), base);
}

Json to_json(const Molecule& m) {
  Json out;
  out["kind"] = "molecule";
  out["coeffs"] = Json::object();
  for (const auto& [label, c] : m.coeffs) out["coeffs"][label] = rational_to_json(c);
  return out;
}

Molecule molecule_from_json(const Json& doc, const std::string& path) {
  expect_kind(doc, path, {"molecule"});
  const std::string cp = child(path, "coeffs");
  const Json& c = object_at(field(doc, "coeffs", path), cp);
  Molecule m;
  for (auto it = c.begin(); it != c.end(); ++it) m.coeffs[it.key()] = rational_from_json(it.value(), child(cp, it.key()));
  return m;
}

std::vector<Molecule> molecules_from_json(const Json& doc, const std::string& path) {
  if (doc.is_object() && doc.contains("molecules")) return molecules_from_json(doc["molecules"], child(path, "molecules"));
  if (!doc.is_array()) return {molecule_from_json(doc, path)};
  std::vector<Molecule> out;
  for (std::size_t i = 0; i < doc.size(); ++i) out.push_back(molecule_from_json(doc[i], child(path, i)));
  return out;
}

Json point_map_to_json(const PointMap& f) {
  Json out;
  out["kind"] = "point_map";
  out["values"] = Json::object();
  for (const auto& [label, v] : f) out["values"][label] = vector_to_json(v);
  return out;
}

PointMap point_map_from_json(const Json& doc, const std::string& path) {
  expect_kind(doc, path, {"point_map"});
  const std::string vp = child(path, "values");
  const Json& vals = object_at(field(doc, "values", path), vp);
  PointMap f;
  for (auto it = vals.begin(); it != vals.end(); ++it) f[it.key()] = vector_from_json(it.value(), child(vp, it.key()));
  return f;
}

Json pairs_to_json(const std::vector<std::pair<std::string, std::string>>& pairs) {
  Json out;
  out["kind"] = "partial_map";
  out["pairs"] = Json::array();
  for (const auto& [a, b] : pairs) out["pairs"].push_back({a, b});
  return out;
}

std::vector<std::pair<std::string, std::string>> pairs_from_json(const Json& doc, const std::string& path) {
  expect_kind(doc, path, {"partial_map"});
  const std::string pp = child(path, "pairs");
  const Json& arr = array_at(field(doc, "pairs", path), pp);
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    auto two = strings_from(arr[i], child(pp, i));
    if (two.size() != 2) throw FormatError(child(pp, i), "expected a pair of labels");
    out.emplace_back(two[0], two[1]);
  }
  return out;
}

Json to_json(const ValidationReport& report) {
  Json out;
  out["ok"] = report.ok();
  out["violations"] = Json::array();
  for (const auto& v : report.violations) out["violations"].push_back({{"rule", v.rule}, {"witness", v.witness}, {"detail", v.detail}});
  return out;
}

Json to_json(const IsometryReport& report) {
  Json out;
  out["ok"] = report.ok;
  out["sampled"] = report.sampled;
  out["max_ratio"] = rational_to_json(report.max_ratio);
  out["min_ratio"] = rational_to_json(report.min_ratio);
  out["worst"] = vector_to_json(report.worst);
  if (!report.message.empty()) out["message"] = report.message;
  return out;
}

Json to_json(const CertificateReport& report) {
  Json out;
  out["ok"] = report.ok;
  out["seq"] = report.seq ? Json(*report.seq) : Json(nullptr);
  out["message"] = report.message;
  out["records_checked"] = report.records_checked;
  out["pending"] = report.pending;
  return out;
}

Json to_json(const MissingTask& task) {
  Json out;
  out["substructure"] = task.substructure;
  out["descriptor"] = to_json(task.descriptor);
  return out;
}

Json to_json(const LiftReport& report) {
  Json out;
  out["ok"] = report.ok();
  out["molecules"] = Json::array();
  for (const auto& e : report.entries)
    out["molecules"].push_back({{"free_norm", rational_to_json(e.free_norm)},
                                {"dual", rational_to_json(e.dual)},
                                {"image_norm", rational_to_json(e.image_norm)},
                                {"bound", rational_to_json(e.bound)}});
  out["violations"] = report.violations;
  return out;
}

}  // namespace fraisse
