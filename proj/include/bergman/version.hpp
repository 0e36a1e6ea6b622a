#pragma once

namespace bergman {

inline constexpr const char* version = "0.1.0";

} // namespace bergman
