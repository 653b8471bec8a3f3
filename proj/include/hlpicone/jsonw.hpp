#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hlpicone {

// Minimal streaming JSON writer with caller-fixed key order, 17-significant-digit
// doubles, and non-finite numbers mapped to null, so reports are byte-stable.
class JsonWriter {
public:
    JsonWriter& begin_object();
    JsonWriter& end_object();
    JsonWriter& begin_array();
    JsonWriter& end_array();
    JsonWriter& key(const std::string& k);
    JsonWriter& value(double v);
    JsonWriter& value(int v);
    JsonWriter& value(std::int64_t v);
    JsonWriter& value(std::uint64_t v);
    JsonWriter& value(bool v);
    JsonWriter& value(const char* s);
    JsonWriter& value(const std::string& s);
    JsonWriter& value_null();

    template <typename T>
    JsonWriter& kv(const std::string& k, const T& v) {
        key(k);
        return value(v);
    }
    JsonWriter& kv_null(const std::string& k) {
        key(k);
        return value_null();
    }

    const std::string& str() const { return out_; }

private:
    void separator();
    void raw_string(const std::string& s);

    std::string out_;
    std::vector<char> stack_; // 'o' or 'a', with a parallel "first element" flag
    std::vector<bool> first_;
    bool after_key_ = false;
};

// 17-significant-digit formatting shared by JSON and CSV output.
std::string fmt17(double v);

} // namespace hlpicone
