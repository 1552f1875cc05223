#pragma once

namespace lvnf {

// Entry point for the `lvnf` tool. Exit codes: 0 success, 1 usage error,
// 2 data error, 3 numerical failure.
int run_cli(int argc, const char* const* argv);

}  // namespace lvnf
