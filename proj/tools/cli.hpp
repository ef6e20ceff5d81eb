#pragma once

#include "lpf/liepair.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpf::cli {

enum ExitCode : int {
    kOk = 0,
    kParseFailure = 2,
    kValidationFailure = 3,
    kPreconditionFailure = 4,
    kInvariantViolation = 5,
};

struct RunConfig {
    std::string input;
    std::string command = "validate";
    int trunc = -1;  // -1: command default
    int order = -1;  // -1: command default
    std::string weights = "closed"; // closed: closed forms where known; mc: always sample
    long samples = 100000;
    std::optional<std::uint64_t> seed;
    std::string out;
    int aerial = 1, terrestrial = 2; // graph-weights type (n, m)
};

struct RunResult {
    int exit_code = kOk;
    std::string report; // JSON lines, last one is the STATUS record
    std::string table;  // human-readable summary
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::vector<std::string>& commands();

// config tree -> Lie pair; throws ConfigError on malformed input
LiePairSpec load_spec(const nlohmann::json& config);
// connection triples if present, otherwise the torsion-free Bott extension
ConnectionSpec load_connection(const nlohmann::json& config, const LiePairSpec& s);
// scalar, "p/q" string, or a list of monomials {"c", "lam", "eps", "chi", "x"}
GradedElement parse_element(const nlohmann::json& v);

RunResult run(const RunConfig& cfg);
// argv front end; writes the report to --out or stdout
int main_entry(int argc, char** argv);

} // namespace lpf::cli
