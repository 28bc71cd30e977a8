#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vslda {

using WordId = std::uint32_t;
using Topic = std::int32_t;

/// Marker stored in z for tokens whose word is non-informative.
inline constexpr Topic kNoTopic = -1;

class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// One side of the vocabulary partition is empty where it must not be.
class DegeneratePartitionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace log {

enum class Level { kDebug = 0, kInfo = 1, kWarning = 2, kSilent = 3 };

void set_level(Level level);
Level level();
void debug(std::string_view msg);
void info(std::string_view msg);
void warning(std::string_view msg);

}  // namespace log

}  // namespace vslda
