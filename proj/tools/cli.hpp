// Command-line front end. Exit codes: 0 holds/agrees, 1 fails, 2 input error.
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hyperclock {

struct CorpusOutcome {
  std::string name;
  std::string expected;
  std::string got;
  bool witnessConfirmed = false;
  long long runs = 0;
  double seconds = 0;
  bool ok = false;
};

// Replays every entry of dir/corpus.json. Throws on malformed entries.
std::vector<CorpusOutcome> runCorpus(const std::string& dir);

int cliMain(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hyperclock
