#pragma once

#include <stdexcept>
#include <string>

namespace qoptk {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimMismatch : Error {
    explicit DimMismatch(const std::string& msg) : Error("DimMismatch: " + msg) {}
};
struct NotHermitian : Error {
    explicit NotHermitian(const std::string& msg) : Error("NotHermitian: " + msg) {}
};
struct NotPSD : Error {
    explicit NotPSD(const std::string& msg) : Error("NotPSD: " + msg) {}
};
struct NotSubunital : Error {
    explicit NotSubunital(const std::string& msg) : Error("NotSubunital: " + msg) {}
};
struct NotTracePreserving : Error {
    explicit NotTracePreserving(const std::string& msg) : Error("NotTracePreserving: " + msg) {}
};
struct NotNormalized : Error {
    explicit NotNormalized(const std::string& msg) : Error("NotNormalized: " + msg) {}
};
struct DegenerateCenter : Error {
    explicit DegenerateCenter(const std::string& msg) : Error("DegenerateCenter: " + msg) {}
};
struct RefinementStall : Error {
    explicit RefinementStall(const std::string& msg) : Error("RefinementStall: " + msg) {}
};
struct FactorizationFailed : Error {
    explicit FactorizationFailed(const std::string& msg) : Error("FactorizationFailed: " + msg) {}
};
struct PreconditionUnmet : Error {
    explicit PreconditionUnmet(const std::string& msg) : Error("PreconditionUnmet: " + msg) {}
};
struct UnknownOutcome : Error {
    explicit UnknownOutcome(const std::string& msg) : Error("UnknownOutcome: " + msg) {}
};
struct XiNotStrictlyPositive : Error {
    explicit XiNotStrictlyPositive(const std::string& msg) : Error("XiNotStrictlyPositive: " + msg) {}
};
struct NotStrictlyPositiveOperation : Error {
    explicit NotStrictlyPositiveOperation(const std::string& msg)
        : Error("NotStrictlyPositiveOperation: " + msg) {}
};
struct SingularNormalizer : Error {
    explicit SingularNormalizer(const std::string& msg) : Error("SingularNormalizer: " + msg) {}
};
struct UnknownGenerator : Error {
    explicit UnknownGenerator(const std::string& msg) : Error("UnknownGenerator: " + msg) {}
};
struct SchemaError : Error {
    explicit SchemaError(const std::string& path, const std::string& msg)
        : Error("SchemaError at " + path + ": " + msg), field_path(path) {}
    std::string field_path;
};

} // namespace qoptk
