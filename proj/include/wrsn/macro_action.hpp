#pragma once

namespace wrsn {

// A charger's high-level decision: travel to (a, b), then charge for c seconds.
struct MacroAction {
    double a = 0.0;  // m
    double b = 0.0;  // m
    double c = 0.0;  // s, >= 0
};

}  // namespace wrsn
