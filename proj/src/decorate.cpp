#include "fraisse/decorate.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace fraisse {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string tuple_label(const MetricSpace& space, const std::vector<Index>& t) {
  std::string s = "(";
  for (std::size_t k = 0; k < t.size(); ++k) s += (k ? "," : "") + space.label(t[k]);
  return s + ")";
}

std::string first_problem(const ValidationReport& r) {
  if (r.ok()) return {};
  const auto& v = r.violations.front();
  std::string who;
  for (const auto& w : v.witness) who += (who.empty() ? "" : ", ") + w;
  return v.rule + " at (" + who + ")" + (v.detail.empty() ? "" : ": " + v.detail);
}

void prefix_rules(ValidationReport& r, const std::string& prefix) {
  for (auto& v : r.violations) v.rule = prefix + v.rule;
}

// Re-encode tuple codes from radix `from` to radix `to`, with a point map.
Index recode(Index code, int arity, Index from, Index to, const std::vector<Index>& point_map) {
  std::vector<Index> digits(static_cast<std::size_t>(arity));
  for (int k = arity - 1; k >= 0; --k) {
    digits[static_cast<std::size_t>(k)] = code % from;
    code /= from;
  }
  Index out = 0;
  for (Index d : digits) out = out * to + point_map[static_cast<std::size_t>(d)];
  return out;
}

std::vector<Index> decode_tuple(Index code, int arity, Index radix) {
  std::vector<Index> t(static_cast<std::size_t>(arity));
  for (int k = arity - 1; k >= 0; --k) {
    t[static_cast<std::size_t>(k)] = code % radix;
    code /= radix;
  }
  return t;
}

std::vector<Index> merged_control(const std::vector<Index>& a, const std::vector<Index>& b) {
  std::set<Index> s(a.begin(), a.end());
  s.insert(b.begin(), b.end());
  return {s.begin(), s.end()};
}

// Values on `control` derived from the induced function of dec.
MatrixXq values_on_control(const ControlledDecoration& dec, const std::vector<Index>& control) {
  const MatrixXq f = induced_control_values(dec);
  MatrixXq out(f.rows(), static_cast<Index>(control.size()));
  for (std::size_t k = 0; k < control.size(); ++k) out.col(static_cast<Index>(k)) = f.col(control[k]);
  return out;
}

// Decorations of a and b placed on a space whose points are a's points
// (through amap) and b's points (through bmap). Shared points must agree.
Decoration merge_decorations(const DecoratedSpace& a, const std::vector<Index>& amap, const DecoratedSpace& b,
                             const std::vector<Index>& bmap, const MetricSpace& joint) {
  const Index n = joint.size();
  return std::visit(
      overloaded{
          [&](const RelationDecoration& da) -> Decoration {
            const auto& db = std::get<RelationDecoration>(b.decoration);
            RelationDecoration out;
            out.arities = da.arities;
            for (std::size_t i = 0; i < da.arities.size(); ++i) {
              const int arity = da.arities[i];
              std::vector<Index> known;
              std::vector<Rational> vals;
              std::vector<char> seen(static_cast<std::size_t>(tuple_count(n, arity)), 0);
              auto take = [&](const VectorXq& v, Index radix, const std::vector<Index>& map) {
                for (Index c = 0; c < v.size(); ++c) {
                  const Index code = recode(c, arity, radix, n, map);
                  if (seen[static_cast<std::size_t>(code)]) continue;
                  seen[static_cast<std::size_t>(code)] = 1;
                  known.push_back(code);
                  vals.push_back(v(c));
                }
              };
              take(da.values[i], a.size(), amap);
              take(db.values[i], b.size(), bmap);
              VectorXq kv(static_cast<Index>(vals.size()));
              for (std::size_t k = 0; k < vals.size(); ++k) kv(static_cast<Index>(k)) = vals[k];
              out.values.push_back(lipschitz_extend_greatest_tuples(joint, arity, known, kv));
            }
            return out;
          },
          [&](const RetractDecoration& da) -> Decoration {
            const auto& db = std::get<RetractDecoration>(b.decoration);
            RetractDecoration out;
            out.p = VectorXq::Zero(n);
            out.r.assign(static_cast<std::size_t>(n), -1);
            for (Index i = 0; i < a.size(); ++i) {
              out.p(amap[static_cast<std::size_t>(i)]) = da.p(i);
              out.r[static_cast<std::size_t>(amap[static_cast<std::size_t>(i)])] = amap[static_cast<std::size_t>(da.r[static_cast<std::size_t>(i)])];
            }
            for (Index i = 0; i < b.size(); ++i) {
              out.p(bmap[static_cast<std::size_t>(i)]) = db.p(i);
              out.r[static_cast<std::size_t>(bmap[static_cast<std::size_t>(i)])] = bmap[static_cast<std::size_t>(db.r[static_cast<std::size_t>(i)])];
            }
            return out;
          },
          [&](const ControlledDecoration& da) -> Decoration {
            const auto& db = std::get<ControlledDecoration>(b.decoration);
            ControlledDecoration out;
            out.proxy = da.proxy;
            out.control = merged_control(da.control, db.control);
            out.values = MatrixXq::Zero(n, static_cast<Index>(out.control.size()));
            const MatrixXq va = values_on_control(da, out.control);
            const MatrixXq vb = values_on_control(db, out.control);
            for (Index i = 0; i < a.size(); ++i) out.values.row(amap[static_cast<std::size_t>(i)]) = va.row(i);
            for (Index i = 0; i < b.size(); ++i) out.values.row(bmap[static_cast<std::size_t>(i)]) = vb.row(i);
            return out;
          },
          [&](const LipschitzDecoration& da) -> Decoration {
            const auto& db = std::get<LipschitzDecoration>(b.decoration);
            LipschitzDecoration out;
            out.target = da.target;
            out.assignment.assign(static_cast<std::size_t>(n), -1);
            for (Index i = 0; i < a.size(); ++i) out.assignment[static_cast<std::size_t>(amap[static_cast<std::size_t>(i)])] = da.assignment[static_cast<std::size_t>(i)];
            for (Index i = 0; i < b.size(); ++i) out.assignment[static_cast<std::size_t>(bmap[static_cast<std::size_t>(i)])] = db.assignment[static_cast<std::size_t>(i)];
            return out;
          },
      },
      a.decoration);
}

// Throws PreconditionError unless a and b decorate in the same class over the same targets.
void require_same_class(const DecoratedSpace& a, const DecoratedSpace& b) {
  if (a.decoration.index() != b.decoration.index())
    throw PreconditionError("class mismatch: " + to_string(a.age()) + " vs " + to_string(b.age()));
  std::visit(overloaded{
                 [&](const RelationDecoration& da) {
                   if (da.arities != std::get<RelationDecoration>(b.decoration).arities)
                     throw PreconditionError("class mismatch: relation arities differ");
                 },
                 [&](const RetractDecoration&) {},
                 [&](const ControlledDecoration& da) {
                   if (!(da.proxy == std::get<ControlledDecoration>(b.decoration).proxy))
                     throw PreconditionError("class mismatch: compact proxies differ");
                 },
                 [&](const LipschitzDecoration& da) {
                   if (!(da.target == std::get<LipschitzDecoration>(b.decoration).target))
                     throw PreconditionError("class mismatch: target proxies differ");
                 },
             },
             a.decoration);
}

void require_valid_output(const DecoratedSpace& ds, const char* what) {
  auto report = validate_decorated(ds);
  if (!report.ok()) throw InternalError(std::string(what) + " produced an invalid structure: " + first_problem(report));
}

}  // namespace

std::string to_string(AgeClass c) {
  switch (c) {
    case AgeClass::metric: return "metric";
    case AgeClass::age1: return "age1";
    case AgeClass::age2: return "age2";
    case AgeClass::age3: return "age3";
    case AgeClass::age4: return "age4";
  }
  return "?";
}

AgeClass age_class_from_string(const std::string& name) {
  if (name == "metric" || name == "metric_space") return AgeClass::metric;
  if (name == "age1") return AgeClass::age1;
  if (name == "age2") return AgeClass::age2;
  if (name == "age3") return AgeClass::age3;
  if (name == "age4") return AgeClass::age4;
  throw StructuralError("unknown class '" + name + "'");
}

AgeClass DecoratedSpace::age() const {
  switch (decoration.index()) {
    case 0: return std::get<RelationDecoration>(decoration).arities.empty() ? AgeClass::metric : AgeClass::age1;
    case 1: return AgeClass::age2;
    case 2: return AgeClass::age3;
    default: return AgeClass::age4;
  }
}

bool operator==(const CompactProxy& a, const CompactProxy& b) { return a.space == b.space && a.net_radius == b.net_radius; }
bool operator==(const TargetProxy& a, const TargetProxy& b) { return a.space == b.space && a.lipschitz == b.lipschitz; }

bool operator==(const DecoratedSpace& a, const DecoratedSpace& b) {
  if (!(a.space == b.space) || a.decoration.index() != b.decoration.index()) return false;
  return std::visit(
      overloaded{
          [&](const RelationDecoration& da) {
            const auto& db = std::get<RelationDecoration>(b.decoration);
            if (da.arities != db.arities) return false;
            for (std::size_t i = 0; i < da.values.size(); ++i)
              if (!exactly_equal(da.values[i], db.values[i])) return false;
            return true;
          },
          [&](const RetractDecoration& da) {
            const auto& db = std::get<RetractDecoration>(b.decoration);
            return exactly_equal(da.p, db.p) && da.r == db.r;
          },
          [&](const ControlledDecoration& da) {
            const auto& db = std::get<ControlledDecoration>(b.decoration);
            return da.proxy == db.proxy && da.control == db.control && exactly_equal(da.values, db.values);
          },
          [&](const LipschitzDecoration& da) {
            const auto& db = std::get<LipschitzDecoration>(b.decoration);
            return da.target == db.target && da.assignment == db.assignment;
          },
      },
      a.decoration);
}

DecoratedSpace metric_only(MetricSpace space) { return {std::move(space), RelationDecoration{}}; }

MatrixXq induced_control_values(const ControlledDecoration& dec) {
  const Index n = dec.values.rows();
  const Index np = dec.proxy.space.size();
  MatrixXq f = MatrixXq::Zero(n, np);
  for (Index a = 0; a < n; ++a)
    for (Index q = 0; q < np; ++q)
      for (std::size_t k = 0; k < dec.control.size(); ++k) {
        Rational v = dec.values(a, static_cast<Index>(k)) - dec.proxy.space.d(dec.control[k], q);
        if (v > f(a, q)) f(a, q) = std::move(v);
      }
  return f;
}

ControlledDecoration with_full_control(const ControlledDecoration& dec) {
  ControlledDecoration out;
  out.proxy = dec.proxy;
  out.control.resize(static_cast<std::size_t>(dec.proxy.space.size()));
  std::iota(out.control.begin(), out.control.end(), Index{0});
  out.values = induced_control_values(dec);
  return out;
}

void check_decoration_shape(const DecoratedSpace& ds) {
  const Index n = ds.size();
  auto in_range = [](Index i, Index bound) { return i >= 0 && i < bound; };
  std::visit(
      overloaded{
          [&](const RelationDecoration& d) {
            if (d.values.size() != d.arities.size()) throw StructuralError("relation values do not match the arity list");
            for (std::size_t i = 0; i < d.arities.size(); ++i) {
              if (d.arities[i] <= 0) throw StructuralError("relation arity must be positive");
              if (i > 0 && d.arities[i] < d.arities[i - 1]) throw StructuralError("relation arities must be non-decreasing");
              if (d.values[i].size() != tuple_count(n, d.arities[i]))
                throw StructuralError("relation of arity " + std::to_string(d.arities[i]) + " has " +
                                      std::to_string(d.values[i].size()) + " values, expected " +
                                      std::to_string(tuple_count(n, d.arities[i])));
            }
          },
          [&](const RetractDecoration& d) {
            if (d.p.size() != n || static_cast<Index>(d.r.size()) != n)
              throw StructuralError("retraction data does not match the point count");
            for (Index x : d.r)
              if (!in_range(x, n)) throw StructuralError("retraction refers to an unknown point");
          },
          [&](const ControlledDecoration& d) {
            const Index np = d.proxy.space.size();
            if (d.values.rows() != n || d.values.cols() != static_cast<Index>(d.control.size()))
              throw StructuralError("control values must be points x control labels");
            std::set<Index> seen;
            for (Index c : d.control) {
              if (!in_range(c, np)) throw StructuralError("control label outside the compact proxy");
              if (!seen.insert(c).second) throw StructuralError("duplicate control label");
            }
          },
          [&](const LipschitzDecoration& d) {
            if (static_cast<Index>(d.assignment.size()) != n) throw StructuralError("assignment does not match the point count");
            for (Index z : d.assignment)
              if (!in_range(z, d.target.space.size())) throw StructuralError("assignment refers to an unknown target label");
          },
      },
      ds.decoration);
}

ValidationReport validate_decoration(const DecoratedSpace& ds) {
  check_decoration_shape(ds);
  ValidationReport report;
  const MetricSpace& s = ds.space;
  const Index n = s.size();
  std::visit(
      overloaded{
          [&](const RelationDecoration& d) {
            for (std::size_t i = 0; i < d.arities.size(); ++i) {
              const int arity = d.arities[i];
              const VectorXq& v = d.values[i];
              const TupleMetric tm(s, arity);
              for (Index c = 0; c < v.size(); ++c) {
                const auto t = tm.decode(c);
                if (v(c) < 0)
                  report.add("nonnegative", {tuple_label(s, t)}, "p_" + std::to_string(arity) + " = " + format_rational(v(c)));
                // Lipschitz for the sum metric reduces to single-coordinate moves.
                for (int k = 0; k < arity; ++k)
                  for (Index y = t[static_cast<std::size_t>(k)] + 1; y < n; ++y) {
                    auto u = t;
                    u[static_cast<std::size_t>(k)] = y;
                    const Index cu = tm.encode(u);
                    const Rational& dist = s.d(t[static_cast<std::size_t>(k)], y);
                    if (abs(v(c) - v(cu)) > dist) {
                      std::vector<std::string> w = arity == 1 ? std::vector<std::string>{s.label(t[0]), s.label(y)}
                                                              : std::vector<std::string>{tuple_label(s, t), tuple_label(s, u)};
                      report.add("lipschitz", std::move(w),
                                 "arity " + std::to_string(arity) + ": |" + format_rational(v(c)) + " - " +
                                     format_rational(v(cu)) + "| > " + format_rational(dist));
                    }
                  }
              }
            }
          },
          [&](const RetractDecoration& d) {
            for (Index x = 0; x < n; ++x) {
              const Index rx = d.r[static_cast<std::size_t>(x)];
              if (d.p(x) < 0) report.add("nonnegative", {s.label(x)}, "p = " + format_rational(d.p(x)));
              if (d.r[static_cast<std::size_t>(rx)] != rx)
                report.add("retraction_idempotent", {s.label(x)}, "r(r(x)) = " + s.label(d.r[static_cast<std::size_t>(rx)]) + " != r(x) = " + s.label(rx));
              if ((d.p(x) == 0) != (rx == x))
                report.add("retraction_range", {s.label(x)},
                           "p = " + format_rational(d.p(x)) + ", r(x) = " + s.label(rx));
              for (Index y = x + 1; y < n; ++y) {
                const Index ry = d.r[static_cast<std::size_t>(y)];
                if (abs(d.p(x) - d.p(y)) > s.d(x, y))
                  report.add("lipschitz", {s.label(x), s.label(y)},
                             "|" + format_rational(d.p(x)) + " - " + format_rational(d.p(y)) + "| > " + format_rational(s.d(x, y)));
                if (s.d(rx, ry) > s.d(x, y))
                  report.add("retraction_lipschitz", {s.label(x), s.label(y)},
                             format_rational(s.d(rx, ry)) + " > " + format_rational(s.d(x, y)));
              }
            }
          },
          [&](const ControlledDecoration& d) {
            auto proxy_report = validate_metric(d.proxy.space);
            prefix_rules(proxy_report, "proxy_");
            report.merge(proxy_report);
            if (d.proxy.net_radius <= 0) report.add("net_radius", {}, "net radius must be positive");
            const auto& ks = d.proxy.space;
            const MatrixXq f = induced_control_values(d);
            for (Index a = 0; a < n; ++a)
              for (std::size_t k = 0; k < d.control.size(); ++k) {
                const Rational& v = d.values(a, static_cast<Index>(k));
                if (v < 0) report.add("nonnegative", {s.label(a), ks.label(d.control[k])}, format_rational(v));
                else if (f(a, d.control[k]) != v)
                  report.add("control_consistency", {s.label(a), ks.label(d.control[k])},
                             "stored " + format_rational(v) + ", induced " + format_rational(f(a, d.control[k])));
              }
            for (Index q = 0; q < ks.size(); ++q)
              for (Index a = 0; a < n; ++a)
                for (Index b = a + 1; b < n; ++b)
                  if (abs(f(a, q) - f(b, q)) > s.d(a, b))
                    report.add("lipschitz", {s.label(a), s.label(b), ks.label(q)},
                               "|" + format_rational(f(a, q)) + " - " + format_rational(f(b, q)) + "| > " + format_rational(s.d(a, b)));
            for (Index a = 0; a < n; ++a)
              for (Index q = 0; q < ks.size(); ++q)
                for (Index r = q + 1; r < ks.size(); ++r)
                  if (abs(f(a, q) - f(a, r)) > ks.d(q, r))
                    report.add("lipschitz_proxy", {s.label(a), ks.label(q), ks.label(r)},
                               "|" + format_rational(f(a, q)) + " - " + format_rational(f(a, r)) + "| > " + format_rational(ks.d(q, r)));
          },
          [&](const LipschitzDecoration& d) {
            auto proxy_report = validate_metric(d.target.space);
            prefix_rules(proxy_report, "proxy_");
            report.merge(proxy_report);
            const Rational& L = d.target.lipschitz;
            if (L <= 0) report.add("lipschitz_constant", {}, "L must be positive");
            for (Index a = 0; a < n; ++a)
              for (Index b = a + 1; b < n; ++b) {
                const Rational& dz = d.target.space.d(d.assignment[static_cast<std::size_t>(a)], d.assignment[static_cast<std::size_t>(b)]);
                const Rational bound = L * s.d(a, b);
                if (dz > bound)
                  report.add("lipschitz", {s.label(a), s.label(b)}, format_rational(dz) + " > " + format_rational(bound));
              }
          },
      },
      ds.decoration);
  return report;
}

ValidationReport validate_decorated(const DecoratedSpace& ds) {
  ValidationReport report = validate_metric(ds.space);
  report.merge(validate_decoration(ds));
  return report;
}

bool is_closed_substructure(const DecoratedSpace& ds, const std::vector<Index>& points) {
  const auto* d = std::get_if<RetractDecoration>(&ds.decoration);
  if (!d) return true;
  std::set<Index> in(points.begin(), points.end());
  for (Index x : points)
    if (!in.count(d->r[static_cast<std::size_t>(x)])) return false;
  return true;
}

DecoratedSpace restrict_decorated(const DecoratedSpace& ds, const std::vector<Index>& points) {
  check_decoration_shape(ds);
  DecoratedSpace out;
  out.space = ds.space.restrict(points);
  const Index m = static_cast<Index>(points.size());
  const Index n = ds.size();
  out.decoration = std::visit(
      overloaded{
          [&](const RelationDecoration& d) -> Decoration {
            RelationDecoration r;
            r.arities = d.arities;
            for (std::size_t i = 0; i < d.arities.size(); ++i) {
              VectorXq v(tuple_count(m, d.arities[i]));
              for (Index c = 0; c < v.size(); ++c) v(c) = d.values[i](recode(c, d.arities[i], m, n, points));
              r.values.push_back(std::move(v));
            }
            return r;
          },
          [&](const RetractDecoration& d) -> Decoration {
            RetractDecoration r;
            r.p.resize(m);
            for (Index i = 0; i < m; ++i) {
              const Index x = points[static_cast<std::size_t>(i)];
              r.p(i) = d.p(x);
              auto it = std::find(points.begin(), points.end(), d.r[static_cast<std::size_t>(x)]);
              if (it == points.end())
                throw StructuralError("substructure is not closed under r at '" + ds.space.label(x) + "'");
              r.r.push_back(static_cast<Index>(it - points.begin()));
            }
            return r;
          },
          [&](const ControlledDecoration& d) -> Decoration {
            ControlledDecoration r;
            r.proxy = d.proxy;
            r.control = d.control;
            r.values.resize(m, d.values.cols());
            for (Index i = 0; i < m; ++i) r.values.row(i) = d.values.row(points[static_cast<std::size_t>(i)]);
            return r;
          },
          [&](const LipschitzDecoration& d) -> Decoration {
            LipschitzDecoration r;
            r.target = d.target;
            for (Index x : points) r.assignment.push_back(d.assignment[static_cast<std::size_t>(x)]);
            return r;
          },
      },
      ds.decoration);
  return out;
}

namespace {

// Checks the decoration at the last entry of a partial embedding map.
class PartialMatcher {
 public:
  PartialMatcher(const DecoratedSpace& small, const DecoratedSpace& big) : small_(small), big_(big) {
    if (const auto* cs = std::get_if<ControlledDecoration>(&small.decoration)) {
      if (const auto* cb = std::get_if<ControlledDecoration>(&big.decoration)) {
        fs_ = induced_control_values(*cs);
        fb_ = induced_control_values(*cb);
      }
    }
  }

  bool compatible() const {
    if (small_.decoration.index() != big_.decoration.index()) return false;
    return std::visit(overloaded{
                          [&](const RelationDecoration& d) {
                            return d.arities == std::get<RelationDecoration>(big_.decoration).arities;
                          },
                          [&](const RetractDecoration&) { return true; },
                          [&](const ControlledDecoration& d) {
                            return d.proxy == std::get<ControlledDecoration>(big_.decoration).proxy;
                          },
                          [&](const LipschitzDecoration& d) {
                            return d.target == std::get<LipschitzDecoration>(big_.decoration).target;
                          },
                      },
                      small_.decoration);
  }

  bool last_ok(const std::vector<Index>& map) const {
    const Index k = static_cast<Index>(map.size()) - 1;
    const Index img = map.back();
    return std::visit(
        overloaded{
            [&](const RelationDecoration& d) {
              const auto& db = std::get<RelationDecoration>(big_.decoration);
              const Index m = k + 1;
              for (std::size_t i = 0; i < d.arities.size(); ++i) {
                const int arity = d.arities[i];
                for (Index c : tuples_with_last(k, arity)) {
                  const auto t = decode_tuple(c, arity, m);
                  Index cs = 0, cb = 0;
                  for (Index x : t) {
                    cs = cs * small_.size() + x;
                    cb = cb * big_.size() + map[static_cast<std::size_t>(x)];
                  }
                  if (d.values[i](cs) != db.values[i](cb)) return false;
                }
              }
              return true;
            },
            [&](const RetractDecoration& d) {
              const auto& db = std::get<RetractDecoration>(big_.decoration);
              if (d.p(k) != db.p(img)) return false;
              for (Index x = 0; x <= k; ++x) {
                const Index rx = d.r[static_cast<std::size_t>(x)];
                if (rx <= k && map[static_cast<std::size_t>(rx)] != db.r[static_cast<std::size_t>(map[static_cast<std::size_t>(x)])]) return false;
              }
              return true;
            },
            [&](const ControlledDecoration&) {
              for (Index q = 0; q < fs_.cols(); ++q)
                if (fs_(k, q) != fb_(img, q)) return false;
              return true;
            },
            [&](const LipschitzDecoration& d) {
              return d.assignment[static_cast<std::size_t>(k)] ==
                     std::get<LipschitzDecoration>(big_.decoration).assignment[static_cast<std::size_t>(img)];
            },
        },
        small_.decoration);
  }

 private:
  const DecoratedSpace& small_;
  const DecoratedSpace& big_;
  MatrixXq fs_, fb_;
};

}  // namespace

bool preserves_structure(const DecoratedSpace& small, const DecoratedSpace& big, const std::vector<Index>& map) {
  if (static_cast<Index>(map.size()) != small.size()) return false;
  for (Index x : map)
    if (x < 0 || x >= big.size()) return false;
  std::set<Index> image(map.begin(), map.end());
  if (static_cast<Index>(image.size()) != small.size()) return false;
  for (Index i = 0; i < small.size(); ++i)
    for (Index j = i + 1; j < small.size(); ++j)
      if (small.space.d(i, j) != big.space.d(map[static_cast<std::size_t>(i)], map[static_cast<std::size_t>(j)])) return false;
  PartialMatcher matcher(small, big);
  if (!matcher.compatible()) return false;
  std::vector<Index> prefix;
  for (Index x : map) {
    prefix.push_back(x);
    if (!matcher.last_ok(prefix)) return false;
  }
  if (const auto* d = std::get_if<RetractDecoration>(&small.decoration)) {
    const auto& db = std::get<RetractDecoration>(big.decoration);
    for (Index x = 0; x < small.size(); ++x)
      if (map[static_cast<std::size_t>(d->r[static_cast<std::size_t>(x)])] != db.r[static_cast<std::size_t>(map[static_cast<std::size_t>(x)])]) return false;
  }
  return true;
}

std::vector<std::vector<Index>> enumerate_decorated_embeddings(const DecoratedSpace& small, const DecoratedSpace& big) {
  std::vector<std::vector<Index>> out;
  PartialMatcher matcher(small, big);
  if (!matcher.compatible()) return out;
  for_each_embedding(
      small.space, big.space, [&](const std::vector<Index>& m) { return matcher.last_ok(m); },
      [&](const std::vector<Index>& m) {
        if (preserves_structure(small, big, m)) out.push_back(m);
        return true;
      });
  return out;
}

VectorXq lipschitz_extend_greatest(const MetricSpace& space, const std::vector<Index>& known, const VectorXq& values) {
  return lipschitz_extend_greatest(space.size(), known, values, [&](Index i, Index j) { return space.d(i, j); });
}

VectorXq lipschitz_extend_greatest_tuples(const MetricSpace& space, int arity, const std::vector<Index>& known,
                                          const VectorXq& values) {
  const TupleMetric tm(space, arity);
  std::vector<std::vector<Index>> decoded(static_cast<std::size_t>(tm.count()));
  for (Index c = 0; c < tm.count(); ++c) decoded[static_cast<std::size_t>(c)] = tm.decode(c);
  return lipschitz_extend_greatest(tm.count(), known, values, [&](Index a, Index b) {
    return tm.distance(decoded[static_cast<std::size_t>(a)], decoded[static_cast<std::size_t>(b)]);
  });
}

DecoratedAmalgam amalgamate_decorated(const DecoratedSpace& left, const DecoratedSpace& right, const DecoratedSpace& base,
                                      bool validate) {
  require_same_class(left, right);
  require_same_class(left, base);
  check_decoration_shape(left);
  check_decoration_shape(right);
  check_decoration_shape(base);
  if (base.size() == 0) return joint_embed_far_apart(left, right);

  auto base_in = [&](const DecoratedSpace& side, const char* name) {
    std::vector<Index> map;
    for (const auto& l : base.space.labels()) {
      auto i = side.space.find(l);
      if (!i) throw PreconditionError("base point '" + l + "' missing from " + name);
      map.push_back(*i);
    }
    if (!is_closed_substructure(side, map)) throw StructuralError(std::string("base is not closed under r in ") + name);
    return map;
  };
  const auto bl = base_in(left, "left");
  const auto br = base_in(right, "right");
  require_isometric_subspace(base.space, left.space, "left");
  require_isometric_subspace(base.space, right.space, "right");
  if (!preserves_structure(base, left, bl)) throw PreconditionError("decoration mismatch between base and left");
  if (!preserves_structure(base, right, br)) throw PreconditionError("decoration mismatch between base and right");

  Amalgam m = amalgamate_greatest(left.space, right.space, base.space);
  DecoratedAmalgam out;
  out.space.space = m.space;
  out.space.decoration = merge_decorations(left, m.left_map, right, m.right_map, m.space);
  out.left_map = std::move(m.left_map);
  out.right_map = std::move(m.right_map);
  if (validate) require_valid_output(out.space, "amalgamation");
  return out;
}

Rational far_apart_constant(const DecoratedSpace& a, const DecoratedSpace& b) {
  Rational scale = max(a.space.diameter(), b.space.diameter());
  auto max_entry = [](const MatrixXq& m) {
    Rational best = 0;
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j) best = max(best, m(i, j));
    return best;
  };
  std::visit(overloaded{
                 [&](const RelationDecoration& da) {
                   for (const auto& v : da.values) scale = max(scale, max_entry(v));
                   for (const auto& v : std::get<RelationDecoration>(b.decoration).values) scale = max(scale, max_entry(v));
                 },
                 [&](const RetractDecoration& da) {
                   scale = max(scale, max_entry(da.p));
                   scale = max(scale, max_entry(std::get<RetractDecoration>(b.decoration).p));
                 },
                 [&](const ControlledDecoration& da) {
                   scale = max(scale, max_entry(da.values));
                   scale = max(scale, max_entry(std::get<ControlledDecoration>(b.decoration).values));
                 },
                 [&](const LipschitzDecoration& da) {
                   const auto& db = std::get<LipschitzDecoration>(b.decoration);
                   for (Index x : da.assignment)
                     for (Index y : db.assignment) scale = max(scale, da.target.space.d(x, y) / da.target.lipschitz);
                 },
             },
             a.decoration);
  return scale + 1;
}

DecoratedAmalgam joint_embed_far_apart(const DecoratedSpace& a, const DecoratedSpace& b) {
  require_same_class(a, b);
  check_decoration_shape(a);
  check_decoration_shape(b);
  DecoratedAmalgam out;
  if (a.size() == 0 || b.size() == 0) {
    const DecoratedSpace& keep = a.size() == 0 ? b : a;
    out.space = keep;
    std::vector<Index> id(static_cast<std::size_t>(keep.size()));
    std::iota(id.begin(), id.end(), Index{0});
    (a.size() == 0 ? out.right_map : out.left_map) = id;
    return out;
  }
  const Index na = a.size();
  const Index n = na + b.size();
  std::vector<std::string> labels = a.space.labels();
  std::vector<std::string> extra = b.space.labels();
  for (auto& l : extra) {
    auto i = a.space.find(l);
    if (!i) continue;
    labels[static_cast<std::size_t>(*i)] += ".L";
    l += ".R";
  }
  labels.insert(labels.end(), extra.begin(), extra.end());
  const Rational cross = 2 * far_apart_constant(a, b);
  MatrixXq d = MatrixXq::Constant(n, n, cross);
  d.topLeftCorner(na, na) = a.space.dist();
  d.bottomRightCorner(b.size(), b.size()) = b.space.dist();
  MetricSpace joint(std::move(labels), std::move(d));
  out.left_map.resize(static_cast<std::size_t>(na));
  std::iota(out.left_map.begin(), out.left_map.end(), Index{0});
  out.right_map.resize(static_cast<std::size_t>(b.size()));
  std::iota(out.right_map.begin(), out.right_map.end(), na);
  out.space.decoration = merge_decorations(a, out.left_map, b, out.right_map, joint);
  out.space.space = std::move(joint);
  require_valid_output(out.space, "joint embedding");
  return out;
}

bool operator==(const PointExtension& a, const PointExtension& b) {
  if (!exactly_equal(a.profile, b.profile) || a.payload.index() != b.payload.index()) return false;
  return std::visit(
      overloaded{
          [&](const std::monostate&) { return true; },
          [&](const RelationExtension& ra) {
            const auto& rb = std::get<RelationExtension>(b.payload);
            if (ra.values.size() != rb.values.size()) return false;
            for (std::size_t i = 0; i < ra.values.size(); ++i)
              if (!exactly_equal(ra.values[i], rb.values[i])) return false;
            return true;
          },
          [&](const RetractExtension& ra) {
            const auto& rb = std::get<RetractExtension>(b.payload);
            return ra.p == rb.p && ra.retract_to == rb.retract_to;
          },
          [&](const ControlledExtension& ca) { return exactly_equal(ca.values, std::get<ControlledExtension>(b.payload).values); },
          [&](const LipschitzExtension& la) {
            const auto& lb = std::get<LipschitzExtension>(b.payload);
            if (la.target.index() != lb.target.index()) return false;
            if (la.target.index() == 0) return std::get<Index>(la.target) == std::get<Index>(lb.target);
            return exactly_equal(std::get<VectorXq>(la.target), std::get<VectorXq>(lb.target));
          },
      },
      a.payload);
}

std::vector<Index> tuples_with_last(Index n, int arity) {
  std::vector<Index> out;
  const Index total = tuple_count(n + 1, arity);
  for (Index c = 0; c < total; ++c) {
    const auto t = decode_tuple(c, arity, n + 1);
    if (std::find(t.begin(), t.end(), n) != t.end()) out.push_back(c);
  }
  return out;
}

namespace {

const char* payload_name(const Decoration& d) {
  switch (d.index()) {
    case 0: return "relation";
    case 1: return "retraction";
    case 2: return "controlled";
    default: return "lipschitz";
  }
}

template <typename T>
const T& payload_as(const PointExtension& ext, const Decoration& d) {
  const T* p = std::get_if<T>(&ext.payload);
  if (!p) throw StructuralError(std::string("extension payload does not match the ") + payload_name(d) + " decoration");
  return *p;
}

}  // namespace

DecoratedSpace build_extension(const DecoratedSpace& sub, const PointExtension& ext, const std::string& label) {
  check_decoration_shape(sub);
  DecoratedSpace out;
  out.space = one_point_extend(sub.space, ext.profile, label);
  const Index n = sub.size();
  out.decoration = std::visit(
      overloaded{
          [&](const RelationDecoration& d) -> Decoration {
            RelationDecoration r;
            r.arities = d.arities;
            if (d.arities.empty()) {
              if (!std::holds_alternative<std::monostate>(ext.payload) &&
                  !(std::holds_alternative<RelationExtension>(ext.payload) &&
                    std::get<RelationExtension>(ext.payload).values.empty()))
                throw StructuralError("metric extension carries a decoration payload");
              return r;
            }
            const auto& pe = payload_as<RelationExtension>(ext, sub.decoration);
            if (pe.values.size() != d.arities.size()) throw StructuralError("relation payload does not match the arity list");
            std::vector<Index> id(static_cast<std::size_t>(n));
            std::iota(id.begin(), id.end(), Index{0});
            for (std::size_t i = 0; i < d.arities.size(); ++i) {
              const int arity = d.arities[i];
              const auto fresh = tuples_with_last(n, arity);
              if (pe.values[i].size() != static_cast<Index>(fresh.size()))
                throw StructuralError("relation payload of arity " + std::to_string(arity) + " has the wrong length");
              VectorXq v(tuple_count(n + 1, arity));
              for (Index c = 0; c < d.values[i].size(); ++c) v(recode(c, arity, n, n + 1, id)) = d.values[i](c);
              for (std::size_t k = 0; k < fresh.size(); ++k) v(fresh[k]) = pe.values[i](static_cast<Index>(k));
              r.values.push_back(std::move(v));
            }
            return r;
          },
          [&](const RetractDecoration& d) -> Decoration {
            const auto& pe = payload_as<RetractExtension>(ext, sub.decoration);
            RetractDecoration r = d;
            r.p.conservativeResize(n + 1);
            r.p(n) = pe.p;
            if (pe.retract_to && (*pe.retract_to < 0 || *pe.retract_to >= n))
              throw StructuralError("retraction target outside the substructure");
            r.r.push_back(pe.retract_to ? *pe.retract_to : n);
            return r;
          },
          [&](const ControlledDecoration& d) -> Decoration {
            const auto& pe = payload_as<ControlledExtension>(ext, sub.decoration);
            if (pe.values.size() != d.proxy.space.size()) throw StructuralError("controlled payload must cover the whole proxy");
            ControlledDecoration r = d;
            r.values.conservativeResize(n + 1, Eigen::NoChange);
            for (std::size_t k = 0; k < d.control.size(); ++k) r.values(n, static_cast<Index>(k)) = pe.values(d.control[k]);
            return r;
          },
          [&](const LipschitzDecoration& d) -> Decoration {
            const auto& pe = payload_as<LipschitzExtension>(ext, sub.decoration);
            const Index* z = std::get_if<Index>(&pe.target);
            if (!z) throw PreconditionError("target point of the extension is not a proxy label");
            if (*z < 0 || *z >= d.target.space.size()) throw StructuralError("extension refers to an unknown target label");
            LipschitzDecoration r = d;
            r.assignment.push_back(*z);
            return r;
          },
      },
      sub.decoration);
  return out;
}

PointExtension extract_extension(const DecoratedSpace& ds, const std::vector<Index>& sub, Index x) {
  const Index m = static_cast<Index>(sub.size());
  PointExtension ext;
  ext.profile.resize(m);
  for (Index i = 0; i < m; ++i) ext.profile(i) = ds.space.d(sub[static_cast<std::size_t>(i)], x);
  std::vector<Index> full = sub;
  full.push_back(x);
  ext.payload = std::visit(
      overloaded{
          [&](const RelationDecoration& d) -> ExtensionPayload {
            if (d.arities.empty()) return std::monostate{};
            RelationExtension r;
            for (std::size_t i = 0; i < d.arities.size(); ++i) {
              const int arity = d.arities[i];
              const auto fresh = tuples_with_last(m, arity);
              VectorXq v(static_cast<Index>(fresh.size()));
              for (std::size_t k = 0; k < fresh.size(); ++k)
                v(static_cast<Index>(k)) = d.values[i](recode(fresh[k], arity, m + 1, ds.size(), full));
              r.values.push_back(std::move(v));
            }
            return r;
          },
          [&](const RetractDecoration& d) -> ExtensionPayload {
            RetractExtension r;
            r.p = d.p(x);
            const Index rx = d.r[static_cast<std::size_t>(x)];
            if (rx != x) {
              auto it = std::find(sub.begin(), sub.end(), rx);
              if (it == sub.end())
                throw StructuralError("r('" + ds.space.label(x) + "') lies outside the substructure");
              r.retract_to = static_cast<Index>(it - sub.begin());
            }
            return r;
          },
          [&](const ControlledDecoration& d) -> ExtensionPayload {
            ControlledExtension c;
            const MatrixXq f = induced_control_values(d);
            c.values = f.row(x).transpose();
            return c;
          },
          [&](const LipschitzDecoration& d) -> ExtensionPayload {
            return LipschitzExtension{d.assignment[static_cast<std::size_t>(x)]};
          },
      },
      ds.decoration);
  return ext;
}

std::optional<Violation> extension_violation(const DecoratedSpace& ds, const PointExtension& ext) {
  check_decoration_shape(ds);
  if (auto v = katetov_violation(ds.space, ext.profile)) return v;
  if (const auto* dec = std::get_if<LipschitzDecoration>(&ds.decoration)) {
    const auto& pe = payload_as<LipschitzExtension>(ext, ds.decoration);
    if (const auto* prof = std::get_if<VectorXq>(&pe.target)) {
      const auto& z = dec->target.space;
      if (prof->size() != z.size()) throw StructuralError("target profile must cover the whole proxy");
      std::optional<Index> at;
      for (Index q = 0; q < z.size(); ++q)
        if ((*prof)(q) == 0) at = q;
      if (at) {
        for (Index q = 0; q < z.size(); ++q)
          if ((*prof)(q) != z.d(*at, q))
            return Violation{"target_profile", {z.label(*at), z.label(q)}, "profile disagrees with the proxy metric"};
      } else if (auto v = katetov_violation(z, *prof)) {
        v->rule = "target_" + v->rule;
        return v;
      }
      for (Index a = 0; a < ds.size(); ++a) {
        const Rational& dz = (*prof)(dec->assignment[static_cast<std::size_t>(a)]);
        const Rational bound = dec->target.lipschitz * ext.profile(a);
        if (dz > bound) return Violation{"lipschitz", {ds.space.label(a), "new"}, format_rational(dz) + " > " + format_rational(bound)};
      }
      return std::nullopt;
    }
  }
  const std::string fresh = "\x01new";
  DecoratedSpace built = build_extension(ds, ext, fresh);
  auto report = validate_decoration(built);
  if (!report.ok()) return report.violations.front();
  if (const auto* dec = std::get_if<ControlledDecoration>(&built.decoration)) {
    const MatrixXq f = induced_control_values(*dec);
    const auto& want = std::get<ControlledExtension>(ext.payload).values;
    for (Index q = 0; q < f.cols(); ++q)
      if (f(ds.size(), q) != want(q))
        return Violation{"control_set", {dec->proxy.space.label(q)}, "values are not determined by the control set"};
  }
  return std::nullopt;
}

DecoratedSpace almost_one_point_extend(const DecoratedSpace& input, const PointExtension& abstract, const Rational& eps,
                                       const std::string& label) {
  if (eps <= 0) throw PreconditionError("eps must be positive");
  DecoratedSpace ds = input;
  check_decoration_shape(ds);
  if (const auto* dec = std::get_if<ControlledDecoration>(&ds.decoration)) ds.decoration = with_full_control(*dec);
  if (auto v = extension_violation(ds, abstract)) {
    std::string who;
    for (const auto& w : v->witness) who += (who.empty() ? "" : ", ") + w;
    throw PreconditionError("descriptor violates the class axioms: " + v->rule + " at (" + who + ")" +
                            (v->detail.empty() ? "" : ": " + v->detail));
  }
  const Index n = ds.size();
  const VectorXq& f = abstract.profile;

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return f(a) > f(b); });

  // Graded rule: the j-th largest value moves to the midpoint of
  // (f + (j-1) eps / n, f + j eps / n]. Near-ties can break the Katetov
  // conditions or an r-Lipschitz bound; then every value moves by eps / 2.
  VectorXq graded(n);
  for (Index j = 0; j < n; ++j) graded(order[static_cast<std::size_t>(j)]) = f(order[static_cast<std::size_t>(j)]) + Rational(2 * j + 1) * eps / Rational(2 * n);
  VectorXq uniform(n);
  for (Index i = 0; i < n; ++i) uniform(i) = f(i) + eps / 2;

  std::string last_problem;
  for (const VectorXq* q : {&graded, &uniform}) {
    if (katetov_violation(ds.space, *q)) {
      last_problem = "perturbed profile is not Katetov";
      continue;
    }
    Rational delta = eps / 2;
    for (Index i = 0; i < n; ++i) delta = i == 0 ? Rational((*q)(i) - f(i)) : min(delta, Rational((*q)(i) - f(i)));
    PointExtension realized{*q, abstract.payload};
    if (const auto* le = std::get_if<LipschitzExtension>(&abstract.payload)) {
      if (const auto* prof = std::get_if<VectorXq>(&le->target)) {
        const auto& dec = std::get<LipschitzDecoration>(ds.decoration);
        Index z0 = 0;
        for (Index z = 1; z < prof->size(); ++z)
          if ((*prof)(z) < (*prof)(z0)) z0 = z;
        if (!((*prof)(z0) < dec.target.lipschitz * delta)) {
          last_problem = "proxy resolution insufficient: nearest proxy point '" + dec.target.space.label(z0) +
                         "' is at distance " + format_rational((*prof)(z0)) + ", need < " +
                         format_rational(dec.target.lipschitz * delta);
          continue;
        }
        realized.payload = LipschitzExtension{z0};
      }
    }
    DecoratedSpace out = build_extension(ds, realized, label);
    auto report = validate_decoration(out);
    if (!report.ok()) {
      last_problem = first_problem(report);
      continue;
    }
    return out;
  }
  if (last_problem.rfind("proxy resolution insufficient", 0) == 0) throw PreconditionError(last_problem);
  throw InternalError("almost one-point extension failed: " + last_problem);
}

}  // namespace fraisse
