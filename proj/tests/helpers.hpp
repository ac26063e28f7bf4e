#pragma once

#include "bdt/model.hpp"

#include <doctest.h>

#include <cmath>
#include <initializer_list>

inline bdt::Vector<double> vec(std::initializer_list<double> xs) {
  bdt::Vector<double> v(static_cast<bdt::Index>(xs.size()));
  bdt::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline bdt::BDModel make(std::initializer_list<double> lambda, std::initializer_list<double> mu,
                         std::initializer_list<double> q_plus, std::initializer_list<double> q_minus) {
  return {vec(lambda), vec(mu), vec(q_plus), vec(q_minus)};
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

#define CHECK_CODE(expr, expected_code)                         \
  do {                                                          \
    bool thrown_ = false;                                       \
    try {                                                       \
      (void)(expr);                                             \
    } catch (const bdt::Error& e_) {                            \
      thrown_ = true;                                           \
      CHECK_MESSAGE(e_.code() == (expected_code), e_.what());   \
    }                                                           \
    CHECK_MESSAGE(thrown_, "no bdt::Error from " #expr);        \
  } while (0)
