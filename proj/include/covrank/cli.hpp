#pragma once

namespace covrank::cli {

// Entry point of the covrank binary. Returns 0 on success, 1 on a domain
// error and 2 on a usage or I/O error.
int run(int argc, char** argv);

}  // namespace covrank::cli
