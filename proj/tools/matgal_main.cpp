// SPDX-License-Identifier: Apache-2.0
#include "matgal/cli.hpp"

int main(int argc, char** argv) { return matgal::cli::run(argc, argv); }
