// JSON file formats for automata, executions, environments, flows and verdicts.
#pragma once

#include <stdexcept>
#include <string>
#include <variant>

#include <json.hpp>

#include "hyperclock/automaton.hpp"
#include "hyperclock/engine.hpp"
#include "hyperclock/pointwise.hpp"
#include "hyperclock/semantics.hpp"

namespace hyperclock {

using Json = nlohmann::ordered_json;

// Malformed input; where() is a JSON pointer or "line:col" position.
class InputError : public std::runtime_error {
 public:
  InputError(const std::string& where, const std::string& msg)
      : std::runtime_error(where.empty() ? msg : where + ": " + msg), where_(where), message_(msg) {}
  const std::string& where() const { return where_; }
  const std::string& message() const { return message_; }

 private:
  std::string where_, message_;
};

// Parses text, reporting syntax errors with line and column.
Json parseJson(const std::string& text);
std::string readFile(const std::string& path);

TimedAutomaton automatonFromJson(const Json& j);
Json toJson(const TimedAutomaton& A);

PointTimedAutomaton pointAutomatonFromJson(const Json& j);
Json toJson(const PointTimedAutomaton& B);

Execution executionFromJson(const Json& j, const std::string& where = "");
Json toJson(const Execution& rho);

PointExecution pointExecutionFromJson(const Json& j, const std::string& where = "");
Json toJson(const PointExecution& eta);

using Environment = std::variant<PathEnvironment, PointEnvironment>;
Environment environmentFromJson(const Json& j);
Json toJson(const PathEnvironment& Pi);
Json toJson(const PointEnvironment& Gamma);

Flow flowFromJson(const Json& j);
Json toJson(const Flow& f);

Json toJson(const GridBudget& b);
// Wall time is left out unless timing is set, so identical runs print identical bytes.
Json toJson(const Verdict& v, bool timing = false);

}  // namespace hyperclock
