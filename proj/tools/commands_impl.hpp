#pragma once

#include <exception>
#include <ostream>

#include "psstn/errors.hpp"

namespace psstn::cli {

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const SizeGuardError& e) {
    err << "error: " << e.what() << '\n';
    return kSizeGuard;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const NumericalFailure& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "unexpected error: " << e.what() << '\n';
    return kUnexpected;
  }
}

}  // namespace psstn::cli
