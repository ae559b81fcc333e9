#ifndef FRAISSE_TESTS_GENERATORS_HPP
#define FRAISSE_TESTS_GENERATORS_HPP

// Random members of the four decorated classes, plus random valid one-point
// extension descriptors over them. Fixed seeds are supplied by the callers.

#include "fraisse/decorate.hpp"
#include "oracles.hpp"

namespace gen {

using namespace fraisse;

inline Rational unit_fraction(std::mt19937_64& rng, long den = 8) {
  std::uniform_int_distribution<long> num(0, den);
  return Rational(num(rng), den);
}

// min over anchors of v + dist: always 1-Lipschitz and non-negative.
template <typename Dist>
VectorXq anchored(std::mt19937_64& rng, Index count, Dist dist, long den) {
  std::uniform_int_distribution<Index> pick(0, count - 1);
  const int anchors = 1 + static_cast<int>(rng() % 3);
  std::vector<Index> at;
  std::vector<Rational> v;
  for (int k = 0; k < anchors; ++k) {
    at.push_back(pick(rng));
    v.push_back(oracle::random_rational(rng, 3, den) - 1);
    if (v.back() < 0) v.back() = 0;
  }
  VectorXq out(count);
  for (Index t = 0; t < count; ++t) {
    Rational best = v[0] + dist(t, at[0]);
    for (std::size_t k = 1; k < at.size(); ++k) best = min(best, Rational(v[k] + dist(t, at[k])));
    out(t) = best;
  }
  return out;
}

inline DecoratedSpace random_age1(std::mt19937_64& rng, Index n, std::vector<int> arities, long den = 4) {
  DecoratedSpace ds{oracle::random_metric(rng, n, den), RelationDecoration{}};
  auto& dec = std::get<RelationDecoration>(ds.decoration);
  dec.arities = arities;
  for (int arity : arities) {
    TupleMetric tm(ds.space, arity);
    dec.values.push_back(anchored(rng, tm.count(), [&](Index a, Index b) { return tm.distance(tm.decode(a), tm.decode(b)); }, den));
  }
  return ds;
}

inline VectorXq dist_to_set(const MetricSpace& s, const std::vector<Index>& set) {
  VectorXq p(s.size());
  for (Index x = 0; x < s.size(); ++x) {
    p(x) = s.d(x, set[0]);
    for (Index a : set) p(x) = min(p(x), s.d(x, a));
  }
  return p;
}

inline DecoratedSpace random_age2(std::mt19937_64& rng, Index fixed, Index moving, long den = 4) {
  MetricSpace s = oracle::random_metric(rng, fixed, den, 4, "f");
  std::vector<Index> r(static_cast<std::size_t>(fixed));
  for (Index i = 0; i < fixed; ++i) r[static_cast<std::size_t>(i)] = i;
  for (Index k = 0; k < moving; ++k) {
    const Index a = static_cast<Index>(rng() % static_cast<unsigned long>(fixed));
    VectorXq f = oracle::random_katetov(rng, s, den);
    for (Index y = 0; y < s.size(); ++y) f(y) = max(f(y), s.d(a, r[static_cast<std::size_t>(y)]));
    s = one_point_extend(s, f, "m" + std::to_string(k));
    r.push_back(a);
  }
  std::vector<Index> fixed_set(static_cast<std::size_t>(fixed));
  for (Index i = 0; i < fixed; ++i) fixed_set[static_cast<std::size_t>(i)] = i;
  return {s, RetractDecoration{dist_to_set(s, fixed_set), r}};
}

inline CompactProxy random_compact(std::mt19937_64& rng, Index k, long den = 4) {
  return {oracle::random_metric(rng, k, den, 3, "q"), Rational(1)};
}

inline DecoratedSpace random_age3(std::mt19937_64& rng, Index n, const CompactProxy& proxy, long den = 4) {
  MetricSpace s = oracle::random_metric(rng, n, den);
  const Index np = proxy.space.size();
  VectorXq flat = anchored(rng, n * np, [&](Index a, Index b) {
    return s.d(a / np, b / np) + proxy.space.d(a % np, b % np);
  }, den);
  ControlledDecoration dec;
  dec.proxy = proxy;
  for (Index q = 0; q < np; ++q) dec.control.push_back(q);
  dec.values.resize(n, np);
  for (Index a = 0; a < n; ++a)
    for (Index q = 0; q < np; ++q) dec.values(a, q) = flat(a * np + q);
  return {s, dec};
}

inline TargetProxy random_target(std::mt19937_64& rng, Index k, long den = 4) {
  return {oracle::random_metric(rng, k, den, 4, "z"), oracle::random_rational(rng, 2, 2)};
}

inline DecoratedSpace random_age4(std::mt19937_64& rng, Index n, const TargetProxy& target, long den = 4) {
  MetricSpace s;
  std::vector<Index> assign;
  for (Index k = 0; k < n; ++k) {
    const Index z = static_cast<Index>(rng() % static_cast<unsigned long>(target.space.size()));
    VectorXq f = s.empty() ? VectorXq() : oracle::random_katetov(rng, s, den);
    for (Index y = 0; y < s.size(); ++y)
      f(y) = max(f(y), Rational(target.space.d(z, assign[static_cast<std::size_t>(y)]) / target.lipschitz));
    s = one_point_extend(s, f, "p" + std::to_string(k));
    assign.push_back(z);
  }
  return {s, LipschitzDecoration{target, assign}};
}

// Random valid one-point extension descriptors over the whole of ds.

inline PointExtension random_descriptor(std::mt19937_64& rng, const DecoratedSpace& ds, long den = 4) {
  const Index n = ds.size();
  PointExtension ext;
  ext.profile = oracle::random_katetov(rng, ds.space, den);
  VectorXq& f = ext.profile;
  std::visit(
      [&](const auto& dec) {
        using T = std::decay_t<decltype(dec)>;
        if constexpr (std::is_same_v<T, RelationDecoration>) {
          if (dec.arities.empty()) return;
          MetricSpace b = one_point_extend(ds.space, f, "\x01");
          RelationExtension r;
          for (std::size_t i = 0; i < dec.arities.size(); ++i) {
            const int arity = dec.arities[i];
            TupleMetric big(b, arity), small(ds.space, arity);
            std::vector<Index> known;
            for (Index c = 0; c < small.count(); ++c) known.push_back(big.encode(small.decode(c)));
            VectorXq hi = lipschitz_extend_greatest_tuples(b, arity, known, dec.values[i]);
            const Rational lambda = unit_fraction(rng);
            VectorXq vals(static_cast<Index>(tuples_with_last(n, arity).size()));
            Index k = 0;
            for (Index c : tuples_with_last(n, arity)) {
              const auto t = big.decode(c);
              Rational lo = 0;
              for (std::size_t s = 0; s < known.size(); ++s)
                lo = max(lo, Rational(dec.values[i](static_cast<Index>(s)) - big.distance(t, big.decode(known[s]))));
              vals(k++) = lambda * hi(c) + (1 - lambda) * lo;
            }
            r.values.push_back(vals);
          }
          ext.payload = r;
        } else if constexpr (std::is_same_v<T, RetractDecoration>) {
          std::vector<Index> fixed;
          for (Index x = 0; x < n; ++x)
            if (dec.r[static_cast<std::size_t>(x)] == x) fixed.push_back(x);
          if (rng() % 2 == 0) {
            for (Index y = 0; y < n; ++y) f(y) = max(max(f(y), f(dec.r[static_cast<std::size_t>(y)])), dec.p(y));
            // A second pass keeps f(r(y)) <= f(y) after the p adjustment.
            for (Index y = 0; y < n; ++y) f(y) = max(f(y), f(dec.r[static_cast<std::size_t>(y)]));
            ext.payload = RetractExtension{0, std::nullopt};
          } else {
            const Index a = fixed[rng() % fixed.size()];
            for (Index y = 0; y < n; ++y) f(y) = max(f(y), ds.space.d(a, dec.r[static_cast<std::size_t>(y)]));
            Rational p = f(fixed[0]);
            for (Index c : fixed) p = min(p, f(c));
            ext.payload = RetractExtension{p, a};
          }
        } else if constexpr (std::is_same_v<T, ControlledDecoration>) {
          const MatrixXq F = induced_control_values(dec);
          const auto& K = dec.proxy.space;
          VectorXq vals(K.size());
          const Rational lambda = unit_fraction(rng);
          for (Index q = 0; q < K.size(); ++q) {
            Rational hi, lo = 0;
            bool first = true;
            for (Index a = 0; a < n; ++a)
              for (Index r = 0; r < K.size(); ++r) {
                Rational up = F(a, r) + f(a) + K.d(q, r);
                if (first || up < hi) hi = up;
                first = false;
                lo = max(lo, Rational(F(a, r) - f(a) - K.d(q, r)));
              }
            vals(q) = lambda * hi + (1 - lambda) * lo;
          }
          ext.payload = ControlledExtension{vals};
        } else {
          const auto& Z = dec.target.space;
          const Index z = static_cast<Index>(rng() % static_cast<unsigned long>(Z.size()));
          for (Index y = 0; y < n; ++y)
            f(y) = max(f(y), Rational(Z.d(z, dec.assignment[static_cast<std::size_t>(y)]) / dec.target.lipschitz));
          ext.payload = LipschitzExtension{z};
        }
      },
      ds.decoration);
  return ext;
}

/// Age4 descriptor whose target is an abstract point at distance r0 from proxy point z.
inline PointExtension near_target_descriptor(std::mt19937_64& rng, const DecoratedSpace& ds, const Rational& r0, long den = 4) {
  const auto& dec = std::get<LipschitzDecoration>(ds.decoration);
  const auto& Z = dec.target.space;
  const Index z = static_cast<Index>(rng() % static_cast<unsigned long>(Z.size()));
  PointExtension ext;
  ext.profile = oracle::random_katetov(rng, ds.space, den);
  VectorXq prof(Z.size());
  for (Index q = 0; q < Z.size(); ++q) prof(q) = Z.d(z, q) + r0;
  for (Index y = 0; y < ds.size(); ++y)
    ext.profile(y) = max(ext.profile(y), Rational(prof(dec.assignment[static_cast<std::size_t>(y)]) / dec.target.lipschitz));
  ext.payload = LipschitzExtension{prof};
  return ext;
}

}  // namespace gen

#endif  // FRAISSE_TESTS_GENERATORS_HPP
