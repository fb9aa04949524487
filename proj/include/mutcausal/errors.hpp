#pragma once

#include <stdexcept>
#include <string>

namespace mutcausal {

// Base of every error raised by the library. `category()` drives the CLI
// exit code: data problems exit 2, caller misuse 64, everything else 70.
class Error : public std::runtime_error {
public:
    enum class Category { Data, Usage, Internal };

    explicit Error(const std::string& what, Category category = Category::Data)
        : std::runtime_error(what), category_(category) {}

    Category category() const noexcept { return category_; }

private:
    Category category_;
};

#define MUTCAUSAL_DEFINE_ERROR(Name, Base)                                        \
    class Name : public Base {                                                   \
    public:                                                                      \
        using Base::Base;                                                        \
    }

// causal graph
MUTCAUSAL_DEFINE_ERROR(DagError, Error);
MUTCAUSAL_DEFINE_ERROR(CycleError, DagError);
MUTCAUSAL_DEFINE_ERROR(DuplicateEdge, DagError);
MUTCAUSAL_DEFINE_ERROR(SelfLoop, DagError);
MUTCAUSAL_DEFINE_ERROR(UnknownNode, DagError);
MUTCAUSAL_DEFINE_ERROR(NotAdjacent, DagError);
MUTCAUSAL_DEFINE_ERROR(NodeLimit, DagError);

// ingest
MUTCAUSAL_DEFINE_ERROR(ParseError, Error);
MUTCAUSAL_DEFINE_ERROR(SchemaError, Error);
MUTCAUSAL_DEFINE_ERROR(InvariantViolation, Error);
MUTCAUSAL_DEFINE_ERROR(EmptyDataset, Error);
MUTCAUSAL_DEFINE_ERROR(DegenerateVariance, Error);

// models, sampling and analysis
MUTCAUSAL_DEFINE_ERROR(ShapeMismatch, Error);
MUTCAUSAL_DEFINE_ERROR(DomainError, Error);
MUTCAUSAL_DEFINE_ERROR(InsufficientDraws, Error);
MUTCAUSAL_DEFINE_ERROR(UnknownFamily, Error);
MUTCAUSAL_DEFINE_ERROR(UnknownProject, Error);
MUTCAUSAL_DEFINE_ERROR(ManifestMismatch, Error);
MUTCAUSAL_DEFINE_ERROR(ConfigError, Error);

class SamplerError : public Error {
public:
    explicit SamplerError(const std::string& what) : Error(what, Category::Internal) {}
};
MUTCAUSAL_DEFINE_ERROR(DivergenceExplosion, SamplerError);
MUTCAUSAL_DEFINE_ERROR(NonFiniteGradient, SamplerError);

#undef MUTCAUSAL_DEFINE_ERROR

} // namespace mutcausal
