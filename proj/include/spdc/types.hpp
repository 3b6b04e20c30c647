#pragma once

#include <array>
#include <string_view>

namespace spdc {

enum class Pol { X = 0, Y = 1 };
enum class Dir { F = 0, B = 1 };

inline constexpr std::array<Pol, 2> kPols{Pol::X, Pol::Y};
inline constexpr std::array<Dir, 2> kDirs{Dir::F, Dir::B};

/// +1 for forward, -1 for backward propagation.
inline constexpr double dir_sign(Dir d) { return d == Dir::F ? 1.0 : -1.0; }

inline constexpr char pol_char(Pol p) { return p == Pol::X ? 'x' : 'y'; }
inline constexpr char dir_char(Dir d) { return d == Dir::F ? 'F' : 'B'; }

inline constexpr int index(Pol p) { return static_cast<int>(p); }
inline constexpr int index(Dir d) { return static_cast<int>(d); }

}  // namespace spdc

namespace spdc {

/// Down-converted field. In super-vectors the idler always appears as A_i^dagger.
enum class Field { Signal = 0, Idler = 1 };

inline constexpr int index(Field f) { return static_cast<int>(f); }
inline constexpr char field_char(Field f) { return f == Field::Signal ? 's' : 'i'; }
inline constexpr Field partner(Field f) { return f == Field::Signal ? Field::Idler : Field::Signal; }

}  // namespace spdc
