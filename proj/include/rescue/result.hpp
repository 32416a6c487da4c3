#pragma once

#include <cassert>
#include <utility>
#include <variant>

namespace rescue {

/// Visitor built from lambdas, for std::visit.
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// Value-or-error return for domain operations whose failures are routine
/// (rejected commands, unsteady telemetry windows). Load-time failures throw.
template <class T, class E>
class Result {
public:
    Result(T value) : v_(std::in_place_index<0>, std::move(value)) {}
    Result(E error) : v_(std::in_place_index<1>, std::move(error)) {}

    [[nodiscard]] bool ok() const { return v_.index() == 0; }
    explicit operator bool() const { return ok(); }

    [[nodiscard]] const T& value() const& { assert(ok()); return std::get<0>(v_); }
    [[nodiscard]] T& value() & { assert(ok()); return std::get<0>(v_); }
    [[nodiscard]] T&& value() && { assert(ok()); return std::get<0>(std::move(v_)); }
    [[nodiscard]] const E& error() const { assert(!ok()); return std::get<1>(v_); }

    const T* operator->() const { return &value(); }
    const T& operator*() const { return value(); }

private:
    std::variant<T, E> v_;
};

}  // namespace rescue
