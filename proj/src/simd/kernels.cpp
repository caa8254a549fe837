#include "leslab/simd.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace leslab::simd {

std::string_view isa_name(Isa isa)
{
    switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
    }
    return "unknown";
}

namespace {

const KernelTable& select()
{
    if (const char* env = std::getenv("LESLAB_SIMD")) {
        const std::string want(env);
        if (want == "scalar")
            return scalar_kernels();
        if (want == "avx2" && avx2_kernels())
            return *avx2_kernels();
        if (want == "neon" && neon_kernels())
            return *neon_kernels();
        if (want != "auto")
            throw std::runtime_error("LESLAB_SIMD=" + want + " is not available on this CPU");
    }
    if (const auto* t = avx2_kernels())
        return *t;
    if (const auto* t = neon_kernels())
        return *t;
    return scalar_kernels();
}

}  // namespace

const KernelTable& active()
{
    static const KernelTable& table = select();
    return table;
}

}  // namespace leslab::simd
