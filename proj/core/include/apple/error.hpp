#pragma once

#include <stdexcept>
#include <string>

namespace apple {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define APPLE_DEFINE_ERROR(Name)                                  \
    class Name : public ::apple::Error {                          \
    public:                                                       \
        explicit Name(const std::string& what) : Error(what) {}   \
    }

APPLE_DEFINE_ERROR(InvalidArgument);
APPLE_DEFINE_ERROR(FormatError);
APPLE_DEFINE_ERROR(FileNotFound);

}  // namespace apple
