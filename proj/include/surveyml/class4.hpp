#pragma once

#include <string>
#include <vector>

namespace surveyml {

// Four-way diagnostic class derived from the two condition flags. This order
// is used everywhere a 4-way label, probability vector, or confusion matrix
// appears.
enum class Class4 : int { None = 0, AutismOnly = 1, AdhdOnly = 2, Both = 3 };

inline constexpr int kNumClass4 = 4;

inline const std::vector<std::string>& class4_names() {
    static const std::vector<std::string> names = {"None", "AutismOnly", "AdhdOnly", "Both"};
    return names;
}

inline Class4 class4_from_flags(bool asd, bool adhd) {
    if (asd && adhd) return Class4::Both;
    if (asd) return Class4::AutismOnly;
    if (adhd) return Class4::AdhdOnly;
    return Class4::None;
}

}  // namespace surveyml
