#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "rumax/error.hpp"
#include "rumax/solver.hpp"

namespace rumax {

/// A schema violation located by a JSON pointer such as "/utility/lambda".
class SchemaError : public Error {
public:
    SchemaError(std::string pointer, const std::string& what)
        : Error(ErrorCode::kSchemaError, pointer + ": " + what), pointer_(std::move(pointer)) {}

    [[nodiscard]] const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

/// Parses a problem document. Throws SchemaError for malformed fields and
/// kValidationError when the parts do not fit together.
[[nodiscard]] Problem parse_problem(const nlohmann::json& doc);
/// Reads and parses a file; throws kSchemaError when it cannot be read or is not JSON.
[[nodiscard]] Problem load_problem(const std::filesystem::path& path);

[[nodiscard]] nlohmann::json to_json(const Problem& problem);

/// Measures are written as arrays in canonical leaf order.
[[nodiscard]] nlohmann::json measure_to_json(const Measure& measure);
[[nodiscard]] Measure measure_from_json(const ScenarioLattice& lattice, const nlohmann::json& j,
                                        const std::string& pointer);

[[nodiscard]] nlohmann::json to_json(const DualCertificate& cert);
[[nodiscard]] DualCertificate certificate_from_json(const ScenarioLattice& lattice, const nlohmann::json& j);

[[nodiscard]] nlohmann::json to_json(const ScenarioLattice& lattice, const SolveResult& result);

/// "iteration,lower,upper,gap,columns" with %.17g floats.
[[nodiscard]] std::string trace_csv(const SolveResult& result);

/// %.17g, the formatting used for every float written to CSV.
[[nodiscard]] std::string format_double(double v);

}  // namespace rumax
