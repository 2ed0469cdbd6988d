#include "lseforge/backend.hpp"

#include <stdexcept>

namespace lseforge {

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::kCe: return "ce";
    case Backend::kCem: return "cem";
    case Backend::kCce: return "cce";
    case Backend::kCcem: return "ccem";
    case Backend::kBce: return "bce";
  }
  throw std::invalid_argument("to_string: unknown backend value");
}

Backend backend_from_string(std::string_view name) {
  if (name == "ce") return Backend::kCe;
  if (name == "cem") return Backend::kCem;
  if (name == "cce") return Backend::kCce;
  if (name == "ccem") return Backend::kCcem;
  if (name == "bce") return Backend::kBce;
  throw std::invalid_argument("unknown backend '" + std::string(name) +
                              "' (expected ce, cem, cce, ccem, or bce)");
}

}  // namespace lseforge
