#pragma once

#include <ostream>

namespace toxlabel {

// Entry point for the `toxlabel` tool. Subcommands: ingest, cost, annotate,
// transfer, eval, sample, assemble, reconcile. Logs and errors go to `err` as
// one JSON object per line; the return value is the process exit status
// (0 ok, 1 usage, 2 config error, 3 data error, 4 endpoint error).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace toxlabel
