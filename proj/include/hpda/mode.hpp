#pragma once

namespace hpda {

enum class Mode { Plain, SecurePrivate };

inline const char* to_string(Mode m) { return m == Mode::Plain ? "plain" : "sp"; }

}  // namespace hpda
