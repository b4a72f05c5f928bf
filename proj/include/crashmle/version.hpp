#ifndef CRASHMLE_VERSION_HPP
#define CRASHMLE_VERSION_HPP

namespace crashmle {
inline constexpr const char* kVersion = "0.1.0";
}

#endif  // CRASHMLE_VERSION_HPP
