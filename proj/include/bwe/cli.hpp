#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bwe/config.hpp"

namespace bwe::cli {

// Each command reads only files named in the config and writes its
// artifacts plus a short human summary to `out`.
void cmd_train(const RunConfig &config, std::ostream &out);
void cmd_anchor(const RunConfig &config, std::ostream &out);
void cmd_score(const RunConfig &config, std::ostream &out);
void cmd_similar(const RunConfig &config, std::ostream &out);
void cmd_ks(const RunConfig &config, std::ostream &out);
void cmd_glm(const RunConfig &config, std::ostream &out);

// Parses arguments, dispatches, and maps errors to exit codes: 0 success,
// 1 internal or numerical failure, 2 user-input error.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace bwe::cli
