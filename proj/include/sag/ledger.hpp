#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace sag {

enum class BufferKind : std::size_t {
    topology_gradient,
    feature_gradient,
    feature_copies,
    duals,
    perturbation_blocks,
};

inline constexpr std::size_t kBufferKinds = 5;

std::string_view to_string(BufferKind kind);

/// Exact element counts of the engine's own large buffers.  Every buffer is
/// registered through a Lease for as long as it is alive; the ledger keeps
/// the current and peak simultaneously-live totals per kind.
class BufferLedger {
public:
    class Lease {
    public:
        Lease() = default;
        Lease(BufferLedger* ledger, BufferKind kind, std::size_t elements);
        Lease(Lease&& other) noexcept;
        Lease& operator=(Lease&& other) noexcept;
        Lease(const Lease&) = delete;
        Lease& operator=(const Lease&) = delete;
        ~Lease();

        void release();

    private:
        BufferLedger* ledger_ = nullptr;
        BufferKind kind_ = BufferKind::topology_gradient;
        std::size_t elements_ = 0;
    };

    [[nodiscard]] Lease acquire(BufferKind kind, std::size_t elements) { return Lease(this, kind, elements); }

    std::size_t live(BufferKind kind) const { return live_[static_cast<std::size_t>(kind)]; }
    std::size_t peak(BufferKind kind) const { return peak_[static_cast<std::size_t>(kind)]; }
    void reset_peaks() { peak_ = live_; }

private:
    std::array<std::size_t, kBufferKinds> live_{};
    std::array<std::size_t, kBufferKinds> peak_{};
};

struct LedgerPeaks {
    std::array<std::size_t, kBufferKinds> elements{};
    std::size_t operator[](BufferKind kind) const { return elements[static_cast<std::size_t>(kind)]; }
};

LedgerPeaks snapshot_peaks(const BufferLedger& ledger);

}  // namespace sag
