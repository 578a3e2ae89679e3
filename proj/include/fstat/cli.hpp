#pragma once

namespace fse {

// Entry point behind the fstat-embed binary; exposed so tests can drive the
// command surface in process. Exit codes: 0 success, 2 usage or configuration
// error, 3 training failure, 4 evaluation incompatibility.
int run_cli(int argc, const char* const* argv);

}  // namespace fse
