#pragma once

#include <stdexcept>
#include <string>

namespace tanfem {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define TANFEM_DEFINE_ERROR(Name)                                      \
    class Name : public Error {                                        \
    public:                                                            \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

TANFEM_DEFINE_ERROR(ParseError);
TANFEM_DEFINE_ERROR(TopologyError);
TANFEM_DEFINE_ERROR(DegenerateElement);
TANFEM_DEFINE_ERROR(IoError);
TANFEM_DEFINE_ERROR(SingularGradient);
TANFEM_DEFINE_ERROR(DimensionMismatch);
TANFEM_DEFINE_ERROR(NotQTensor);
TANFEM_DEFINE_ERROR(UnsupportedDegree);
TANFEM_DEFINE_ERROR(BadContractionIndex);
TANFEM_DEFINE_ERROR(NoBoundary);
TANFEM_DEFINE_ERROR(NoConvergence);
TANFEM_DEFINE_ERROR(BreakdownError);
TANFEM_DEFINE_ERROR(AmbiguousWinding);
TANFEM_DEFINE_ERROR(ConfigError);

#undef TANFEM_DEFINE_ERROR

}  // namespace tanfem
