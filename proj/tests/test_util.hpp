#pragma once

#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "jacsearch/errors.hpp"

// Catch2 matcher for the library's typed errors.
struct ErrorKindIs : Catch::Matchers::MatcherGenericBase {
  jacsearch::ErrorKind kind;

  explicit ErrorKindIs(jacsearch::ErrorKind k) : kind(k) {}

  bool match(const jacsearch::Error& e) const { return e.kind() == kind; }

  std::string describe() const override {
    return std::string("has kind ") + jacsearch::error_kind_name(kind);
  }
};
