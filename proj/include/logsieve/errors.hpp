#pragma once

#include <stdexcept>
#include <string>

namespace logsieve {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside an operation's mathematical domain (e.g. similarity of two empty sequences).
class DomainError : public Error {
public:
    using Error::Error;
};

class BackendUnavailable : public Error {
public:
    using Error::Error;
};

/// The mock backend was asked for a log it has no fixture or script entry for.
class MockMissingFixture : public Error {
public:
    using Error::Error;
};

class OutputTruncated : public Error {
public:
    using Error::Error;
};

class EmptyExtraction : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace logsieve
