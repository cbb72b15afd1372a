#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "longctx/config.hpp"

namespace longctx {

/// Exit codes: 0 success, 1 partial (skips or transport errors occurred),
/// 2 config / IO error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitConfig = 2;

int cmd_ingest(const RunConfig& cfg, std::ostream& out);
int cmd_synth(const RunConfig& cfg, std::ostream& out);
int cmd_eval(const RunConfig& cfg, std::ostream& out);
int cmd_report(const std::vector<std::filesystem::path>& inputs,
               const std::vector<std::string>& group_by, std::ostream& out);

int run_cli(int argc, const char* const* argv);

}  // namespace longctx
