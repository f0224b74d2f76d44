// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace swirl
{

class Error: public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

#define SWIRL_DEFINE_ERROR(Name, Base) \
    class Name: public Base            \
    {                                  \
      public:                          \
        using Base::Base;              \
    }

SWIRL_DEFINE_ERROR(InvalidInput, Error);
SWIRL_DEFINE_ERROR(IoError, Error);

// Model transport.
SWIRL_DEFINE_ERROR(ModelError, Error);
SWIRL_DEFINE_ERROR(AuthError, ModelError);
SWIRL_DEFINE_ERROR(RateLimited, ModelError);
SWIRL_DEFINE_ERROR(MalformedResponse, ModelError);
SWIRL_DEFINE_ERROR(TimeoutError, ModelError);
SWIRL_DEFINE_ERROR(EndpointError, ModelError);
SWIRL_DEFINE_ERROR(ScriptMiss, ModelError);

// Tools.
SWIRL_DEFINE_ERROR(DimensionMismatch, Error);
SWIRL_DEFINE_ERROR(EmptyIndex, Error);
SWIRL_DEFINE_ERROR(MissingResult, Error);

// Pipeline and datasets.
SWIRL_DEFINE_ERROR(InvalidTrajectory, Error);
SWIRL_DEFINE_ERROR(MissingGoldenAnswer, Error);
SWIRL_DEFINE_ERROR(MissingJudgments, Error);
SWIRL_DEFINE_ERROR(MissingRewards, Error);
SWIRL_DEFINE_ERROR(HashMismatch, Error);
SWIRL_DEFINE_ERROR(SchemaVersionUnsupported, Error);
SWIRL_DEFINE_ERROR(BatchAborted, Error);

// Trainer and statistics.
SWIRL_DEFINE_ERROR(EmptyDataset, Error);
SWIRL_DEFINE_ERROR(NonFiniteGradient, Error);
SWIRL_DEFINE_ERROR(EmptyInput, Error);

#undef SWIRL_DEFINE_ERROR

/// Expression syntax error; `offset` is the byte position in the source text.
class ParseError: public Error
{
  public:
    ParseError(std::size_t offset, const std::string& reason):
        Error("parse error at offset " + std::to_string(offset) + ": " + reason), _offset(offset), _reason(reason)
    {
    }

    std::size_t offset() const noexcept { return _offset; }
    const std::string& reason() const noexcept { return _reason; }

  private:
    std::size_t _offset;
    std::string _reason;
};

} // namespace swirl
