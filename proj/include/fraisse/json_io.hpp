#ifndef FRAISSE_JSON_IO_HPP
#define FRAISSE_JSON_IO_HPP

// JSON documents for every structure the CLI reads or writes. Rationals are
// strings ("num/den" or "num"); readers raise FormatError with a JSON pointer
// to the offending node.

#include "fraisse/engine.hpp"
#include "fraisse/free_space.hpp"
#include "fraisse/gurarij.hpp"

#include "json.hpp"

#include <string>
#include <string_view>

namespace fraisse {

using Json = nlohmann::ordered_json;

Json parse_json_text(std::string_view text);
std::string dump_json(const Json& doc);  // two-space indent, trailing newline

/// The "kind" field, or "" if there is none.
std::string kind_of(const Json& doc);

Json rational_to_json(const Rational& x);
Rational rational_from_json(const Json& node, const std::string& path);
Json vector_to_json(const VectorXq& v);
VectorXq vector_from_json(const Json& node, const std::string& path);
Json matrix_to_json(const MatrixXq& m);
MatrixXq matrix_from_json(const Json& node, const std::string& path);

Json to_json(const MetricSpace& space);
MetricSpace metric_from_json(const Json& doc, const std::string& path = "");

/// Metric-only spaces are written as metric_space documents.
Json to_json(const DecoratedSpace& ds);
DecoratedSpace decorated_from_json(const Json& doc, const std::string& path = "");

Json to_json(const PointExtension& ext);
PointExtension extension_from_json(const Json& doc, const std::string& path);

Json to_json(const EnumerationBudget& budget);
EnumerationBudget budget_from_json(const Json& doc, const std::string& path);

Json chain_to_json(const Chain& chain);
Chain chain_from_json(const Json& doc, const std::string& path = "");

/// Header line, then one line per record.
std::string certificate_to_jsonl(const ChainCertificate& cert);
ChainCertificate certificate_from_jsonl(std::string_view text);

Json to_json(const PartialNormSpace& space);
PartialNormSpace normed_from_json(const Json& doc, const std::string& path = "");

Json to_json(const PointedSpace& space);
PointedSpace pointed_from_json(const Json& doc, const std::string& path = "");

Json to_json(const Molecule& m);
Molecule molecule_from_json(const Json& doc, const std::string& path = "");
std::vector<Molecule> molecules_from_json(const Json& doc, const std::string& path = "");

Json point_map_to_json(const PointMap& f);
PointMap point_map_from_json(const Json& doc, const std::string& path = "");

/// {"kind":"partial_map","pairs":[["a","b"],...]}
Json pairs_to_json(const std::vector<std::pair<std::string, std::string>>& pairs);
std::vector<std::pair<std::string, std::string>> pairs_from_json(const Json& doc, const std::string& path = "");

Json to_json(const ValidationReport& report);
Json to_json(const IsometryReport& report);
Json to_json(const CertificateReport& report);
Json to_json(const MissingTask& task);
Json to_json(const LiftReport& report);

}  // namespace fraisse

#endif  // FRAISSE_JSON_IO_HPP
