#include "spdelab/format.hpp"

#include <charconv>
#include <stdexcept>

namespace spdelab {

std::string format_double(double v) {
    if (v == 0.0) v = 0.0;  // render negative zero as plain 0
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    if (res.ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, res.ptr);
}

}  // namespace spdelab
