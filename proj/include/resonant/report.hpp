#pragma once

// JSON views of analysis results. Every double is rounded to 12 significant
// digits when the document is dumped, so bundles are byte-stable.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "resonant/evolution.hpp"
#include "resonant/nonlinearity.hpp"
#include "resonant/periodic.hpp"
#include "resonant/resonance.hpp"
#include "resonant/spectrum.hpp"

namespace resonant::report {

using Json = nlohmann::ordered_json;

/// 12 significant digits; non-finite values pass through unchanged.
double round12(double v);

/// Rounds every floating-point leaf; NaN and infinities become null.
Json rounded(const Json& j);

/// rounded(j).dump(2) plus a trailing newline.
std::string dump(const Json& j);

Json to_json(const SpectralData& sd);
Json to_json(const DegreeResult& d);
Json to_json(const LLCertificate& c);
Json to_json(const SphereSignReport& s);
Json to_json(const PeriodicReport& r);
Json to_json(const IndexCheck& c);
Json to_json(const TailReport& t);
Json to_json(const PairwiseTailReport& t);
Json to_json(const ValidationReport& v);

/// Certificate layout: {condition, worst_direction, worst_value, degree, zeros:[{coords, sign}]}.
Json certificate(const LLCertificate& ll, const DegreeResult& deg);

struct Csv {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Fixed-point snapshot: node coordinates followed by u.
Csv field_csv(const std::string& name, const Field& u);

/// %.12g, comma separated, '\n' line ends.
std::string to_text(const Csv& csv);

}  // namespace resonant::report
