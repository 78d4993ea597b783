#pragma once

#include "config.hpp"

#include "gradcert/methods.hpp"

#include <iosfwd>

namespace gradcert::cli {

/// Process exit statuses shared by all subcommands.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,      ///< invalid config or input
  kExitViolation = 2,   ///< bound violations, acuteness failure, failed axioms
  kExitNotConverged = 3,  ///< no convergence, or an infeasible certificate
  kExitBreakdown = 4,
};

struct CommandOptions {
  bool fixed_clock = false;
};

int cmd_solve(const RunConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_certify(const RunConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_estimate(const RunConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_verify_space(const RunConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_list_problems(std::ostream& out);

/// Full command-line entry point; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// CSV rendering of a trace: one row per iterate, 17 significant digits.
std::string trace_csv(const IterationTrace& trace);

}  // namespace gradcert::cli
