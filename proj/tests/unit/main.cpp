// Copyright 2026 The dgkd Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "dgkd/core/log.hpp"

int main(int argc, char** argv) {
  dgkd::log::set_threshold(dgkd::log::Level::off);
  doctest::Context context(argc, argv);
  return context.run();
}
