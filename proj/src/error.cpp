#include "vt/error.hpp"

namespace vt {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
      return 1;
    case ErrorKind::kStructural:
    case ErrorKind::kFormat:
      return 2;
    case ErrorKind::kNumeric:
      return 3;
  }
  return 2;
}

}  // namespace vt
