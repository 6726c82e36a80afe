#pragma once

#include <doctest.h>

#include "rmlab/errors.hpp"

template <class Fn>
rmlab::ErrorKind error_kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const rmlab::Error& e) {
    return e.kind();
  }
  FAIL("expected an rmlab::Error");
  return rmlab::ErrorKind::InvalidArgument;
}
