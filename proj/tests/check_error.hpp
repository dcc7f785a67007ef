#pragma once

#include <doctest.h>

#include "emccd/error.hpp"

// Runs expr and checks it throws emccd::Error carrying the given code.
#define CHECK_ERROR_CODE(expr, expected)                        \
  do {                                                          \
    bool thrown_ = false;                                       \
    try {                                                       \
      (void)(expr);                                             \
    } catch (const emccd::Error& e_) {                          \
      thrown_ = true;                                           \
      CHECK_MESSAGE(e_.code() == (expected), e_.what());        \
    }                                                           \
    CHECK_MESSAGE(thrown_, "no emccd::Error from " #expr);      \
  } while (0)
