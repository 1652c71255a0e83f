#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "equilie/irreps.hpp"

namespace equilie::cli {

// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kFailed = 1;
inline constexpr int kUsage = 2;
inline constexpr int kMissingTables = 3;
inline constexpr int kNumerical = 4;

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Irrep label in CLI shorthand for a group: "1" is 2j for SU2 and l for
// SO3/O3 (O3 parity defaults to (-1)^l), "l,p" for O3, "a,b" for SO13,
// "[λ1,...]" for SU(N). Full labels such as "SO3(2)" are accepted too.
IrrepLabel parse_cli_label(GroupKind group, int n, const std::string& text);

}  // namespace equilie::cli
