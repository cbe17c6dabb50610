#pragma once

#include <string>

namespace dprime {

/// Upper (Dirichlet-type) and lower (Neumann/Robin-type) side of a bracket.
enum class Variant { plus, minus };

inline std::string to_string(Variant v) { return v == Variant::plus ? "plus" : "minus"; }

}  // namespace dprime
