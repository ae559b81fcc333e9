#ifndef FRAISSE_REPORT_HPP
#define FRAISSE_REPORT_HPP

#include <string>
#include <utility>
#include <vector>

namespace fraisse {

struct Violation {
  std::string rule;                  // e.g. "triangle", "lipschitz", "self_consistency"
  std::vector<std::string> witness;  // labels or generator indices involved
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  void add(std::string rule, std::vector<std::string> witness, std::string detail = {}) {
    violations.push_back({std::move(rule), std::move(witness), std::move(detail)});
  }
  void merge(const ValidationReport& other) {
    violations.insert(violations.end(), other.violations.begin(), other.violations.end());
  }
  bool has(const std::string& rule) const {
    for (const auto& v : violations)
      if (v.rule == rule) return true;
    return false;
  }
};

}  // namespace fraisse

#endif  // FRAISSE_REPORT_HPP
