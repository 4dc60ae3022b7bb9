/*
 * Copyright (c) 2026 The pmrsim authors
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#ifndef PMRSIM_TESTS_CHECK_H
#define PMRSIM_TESTS_CHECK_H

// pmrsim's own toString overloads return string_view and would be picked up through ADL.
#define DOCTEST_STRINGIFY(...) doctest::toString(__VA_ARGS__)
#include <doctest.h>

#endif // PMRSIM_TESTS_CHECK_H
