#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pcpo {

/// Input data does not conform to the record schema or its invariants.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A sink failed part way through; `written()` records how many items made it out.
class WriteError : public IoError {
public:
    WriteError(const std::string& what, std::size_t written)
        : IoError(what), written_(written) {}

    std::size_t written() const noexcept { return written_; }

private:
    std::size_t written_;
};

}  // namespace pcpo
