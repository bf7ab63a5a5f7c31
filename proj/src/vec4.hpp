#pragma once

// 4-lane float vectors. PortableVec4 is plain C++; NativeVec4 maps onto SSE or NEON when the
// target has one. Both evaluate every operation, including the horizontal sum, in the same
// order so their results are bit-identical.

#include <array>
#include <cstddef>

#if defined(__SSE2__) || defined(_M_X64)
#include <emmintrin.h>
#define STGEMM_HAVE_NATIVE_VEC4 1
#define STGEMM_VEC4_SSE 1
#elif defined(__ARM_NEON)
#include <arm_neon.h>
#define STGEMM_HAVE_NATIVE_VEC4 1
#define STGEMM_VEC4_NEON 1
#else
#define STGEMM_HAVE_NATIVE_VEC4 0
#endif

namespace stgemm::detail {

struct PortableVec4 {
    std::array<float, 4> lanes;

    static PortableVec4 zero() { return {{0.0f, 0.0f, 0.0f, 0.0f}}; }
    static PortableVec4 set(float a, float b, float c, float d) { return {{a, b, c, d}}; }
    static PortableVec4 load(const float *p) { return {{p[0], p[1], p[2], p[3]}}; }
    void store(float *p) const {
        for (std::size_t i = 0; i < 4; ++i)
            p[i] = lanes[i];
    }

    friend PortableVec4 operator+(PortableVec4 a, PortableVec4 b) {
        for (std::size_t i = 0; i < 4; ++i)
            a.lanes[i] += b.lanes[i];
        return a;
    }
    friend PortableVec4 operator-(PortableVec4 a, PortableVec4 b) {
        for (std::size_t i = 0; i < 4; ++i)
            a.lanes[i] -= b.lanes[i];
        return a;
    }

    PortableVec4 prelu(float alpha) const {
        PortableVec4 out;
        for (std::size_t i = 0; i < 4; ++i)
            out.lanes[i] = lanes[i] > 0.0f ? lanes[i] : alpha * lanes[i];
        return out;
    }

    /// (l0 + l2) + (l1 + l3)
    float hsum() const { return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]); }
};

#if defined(STGEMM_VEC4_SSE)

struct NativeVec4 {
    __m128 v;

    static NativeVec4 zero() { return {_mm_setzero_ps()}; }
    static NativeVec4 set(float a, float b, float c, float d) { return {_mm_setr_ps(a, b, c, d)}; }
    static NativeVec4 load(const float *p) { return {_mm_loadu_ps(p)}; }
    void store(float *p) const { _mm_storeu_ps(p, v); }

    friend NativeVec4 operator+(NativeVec4 a, NativeVec4 b) { return {_mm_add_ps(a.v, b.v)}; }
    friend NativeVec4 operator-(NativeVec4 a, NativeVec4 b) { return {_mm_sub_ps(a.v, b.v)}; }

    NativeVec4 prelu(float alpha) const {
        const __m128 scaled = _mm_mul_ps(v, _mm_set1_ps(alpha));
        const __m128 positive = _mm_cmpgt_ps(v, _mm_setzero_ps());
        return {_mm_or_ps(_mm_and_ps(positive, v), _mm_andnot_ps(positive, scaled))};
    }

    float hsum() const {
        const __m128 halves = _mm_add_ps(v, _mm_movehl_ps(v, v));
        return _mm_cvtss_f32(_mm_add_ss(halves, _mm_shuffle_ps(halves, halves, 1)));
    }
};

#elif defined(STGEMM_VEC4_NEON)

struct NativeVec4 {
    float32x4_t v;

    static NativeVec4 zero() { return {vdupq_n_f32(0.0f)}; }
    static NativeVec4 set(float a, float b, float c, float d) {
        const float tmp[4] = {a, b, c, d};
        return {vld1q_f32(tmp)};
    }
    static NativeVec4 load(const float *p) { return {vld1q_f32(p)}; }
    void store(float *p) const { vst1q_f32(p, v); }

    friend NativeVec4 operator+(NativeVec4 a, NativeVec4 b) { return {vaddq_f32(a.v, b.v)}; }
    friend NativeVec4 operator-(NativeVec4 a, NativeVec4 b) { return {vsubq_f32(a.v, b.v)}; }

    NativeVec4 prelu(float alpha) const {
        const float32x4_t scaled = vmulq_n_f32(v, alpha);
        const uint32x4_t positive = vcgtq_f32(v, vdupq_n_f32(0.0f));
        return {vbslq_f32(positive, v, scaled)};
    }

    float hsum() const {
        const float32x2_t halves = vadd_f32(vget_low_f32(v), vget_high_f32(v));
        return vget_lane_f32(vpadd_f32(halves, halves), 0);
    }
};

#endif

} // namespace stgemm::detail
