#pragma once

namespace njode {

// Entry point of the njode tool. Subcommands: generate, train, evaluate,
// export, reproduce. Returns 0 on success, 2 on config/usage errors, 1 on
// anything else; failures print {"error":{"kind","message"}} to stderr.
int run_cli(int argc, char** argv);

}  // namespace njode
