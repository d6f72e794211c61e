#pragma once

#include <stdexcept>
#include <string>

namespace astprobe {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ASTPROBE_DEFINE_ERROR(Name)          \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

// ast-codec
ASTPROBE_DEFINE_ERROR(ParseError);
ASTPROBE_DEFINE_ERROR(UnsupportedLanguage);
ASTPROBE_DEFINE_ERROR(MalformedLabel);
ASTPROBE_DEFINE_ERROR(UnknownLabel);
ASTPROBE_DEFINE_ERROR(LengthMismatch);

// probe-core
ASTPROBE_DEFINE_ERROR(DimensionError);
ASTPROBE_DEFINE_ERROR(DegenerateSequence);
ASTPROBE_DEFINE_ERROR(EmptyDataset);

// eval
ASTPROBE_DEFINE_ERROR(LeafMismatch);

// data-pipeline
ASTPROBE_DEFINE_ERROR(SpanError);
ASTPROBE_DEFINE_ERROR(FormatError);
ASTPROBE_DEFINE_ERROR(ChecksumError);
ASTPROBE_DEFINE_ERROR(InsufficientData);

#undef ASTPROBE_DEFINE_ERROR

}  // namespace astprobe
