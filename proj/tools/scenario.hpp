#pragma once

// Scenario files: strict parsing of the JSON config into library objects.

#include "bcl/suites.hpp"
#include "bcl/verifier.hpp"

#include <json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bcl::cli {

using json = nlohmann::ordered_json;

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline const std::vector<std::string>& task_names()
{
    static const std::vector<std::string> names{"geometry-suite", "weights-suite", "lattice-suite",    "carleson-pq",
                                                "carleson-qp",    "operator-check", "compactness-probe", "audit-4.2"};
    return names;
}

struct AuditParams {
    double s = 1.0;
    double R = 0.5;
    double N = 2.0;
    double t0 = 0.9;
    std::vector<double> ts;
    McSettings mc{4096, 1, 512};
};

struct Scenario {
    std::string task;
    std::string format = "json";
    std::string output_path;
    std::uint64_t seed = 1;
    std::optional<SymbolConfig> cfg;  // absent for geometry-suite
    int probe_depth = 10;
    AuditParams audit;
    GeometrySuiteSettings geometry;
    LatticeSuiteSettings lattice;
};

/// Validates the whole document and builds every object it names. Throws SchemaError.
Scenario parse_scenario(const json& doc);

}  // namespace bcl::cli
