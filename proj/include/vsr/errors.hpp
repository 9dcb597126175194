#ifndef VSR_ERRORS_HPP
#define VSR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace vsr {

// Base class for all errors raised by the library. CLI maps these to exit 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define VSR_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                   \
   public:                                                      \
    explicit Name(const std::string& msg) : Error(msg) {}       \
  }

// tensor / tape
VSR_DEFINE_ERROR(ShapeMismatch);
VSR_DEFINE_ERROR(InvalidStride);
VSR_DEFINE_ERROR(NotScalar);
VSR_DEFINE_ERROR(DetachedGraph);

// landmark graph / encoders
VSR_DEFINE_ERROR(DegeneratePositions);
VSR_DEFINE_ERROR(EmptyClip);
VSR_DEFINE_ERROR(EmptyInput);
VSR_DEFINE_ERROR(EmptyPrefix);

// losses
VSR_DEFINE_ERROR(InfeasibleTarget);
VSR_DEFINE_ERROR(InvalidDistribution);
VSR_DEFINE_ERROR(TooLarge);
VSR_DEFINE_ERROR(LengthMismatch);
VSR_DEFINE_ERROR(AlphaOutOfRange);

// decoding
VSR_DEFINE_ERROR(EmptyLexicon);

// data / g2p
VSR_DEFINE_ERROR(ContainsDigits);
VSR_DEFINE_ERROR(RateOutOfRange);
VSR_DEFINE_ERROR(OOVWord);
VSR_DEFINE_ERROR(EmptyCorpus);
VSR_DEFINE_ERROR(ParseError);
VSR_DEFINE_ERROR(MissingFile);

// harness
VSR_DEFINE_ERROR(EmptyReference);
VSR_DEFINE_ERROR(UtteranceTooLong);
VSR_DEFINE_ERROR(InvalidSchedule);
VSR_DEFINE_ERROR(VersionMismatch);
VSR_DEFINE_ERROR(CorruptFile);

#undef VSR_DEFINE_ERROR

}  // namespace vsr

#endif  // VSR_ERRORS_HPP
