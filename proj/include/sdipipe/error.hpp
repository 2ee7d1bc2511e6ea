#pragma once

#include <stdexcept>
#include <string>

namespace sdipipe {

// Exit-code buckets used by the CLI: 1 usage, 2 data, 3 internal.
enum class ErrorKind { Usage = 1, Data = 2, Internal = 3 };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline Error data_error(const std::string& msg) { return Error(ErrorKind::Data, msg); }
inline Error usage_error(const std::string& msg) { return Error(ErrorKind::Usage, msg); }
inline Error internal_error(const std::string& msg) { return Error(ErrorKind::Internal, msg); }

}  // namespace sdipipe
