#pragma once

#include "json.hpp"
#include <string>

#include "fracvar/problem.hpp"
#include "fracvar/residuals.hpp"
#include "fracvar/solver.hpp"

namespace fracvar {

using Json = nlohmann::ordered_json;

/// Absent optional fields are omitted; non-finite numbers become null.
Json to_json(const TailReport& tail);
Json to_json(const TransversalityReport& rep);
Json to_json(const TraceEntry& e);
Json to_json(const KktRecord& k);

/// Full solve report. Key order is fixed, so equal reports dump to equal text.
Json to_json(const VariationalProblem& p, const SolverOptions& opts, const SolverReport& rep);

/// Two-space indented dump with a trailing newline.
std::string dump(const Json& j);

}  // namespace fracvar
