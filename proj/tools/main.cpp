//
// Project dualfuse - Copyright 2026 The dualfuse Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <iostream>

#include "dualfuse/cli.hpp"

int main(int argc, char **argv) {
  return dualfuse::cli::dispatch({argv + 1, argv + argc}, std::cout, std::cerr);
}
