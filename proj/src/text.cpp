#include "erkit/text.hpp"

#include <algorithm>
#include <cctype>

namespace erkit::text {

std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (c < 0x80) {
            len = 1;
            cp = c;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            out.push_back(c);
            ++i;
            continue;
        }
        if (i + len > s.size()) {
            out.push_back(c);
            ++i;
            continue;
        }
        bool valid = true;
        for (std::size_t k = 1; k < len; ++k) {
            unsigned char cont = static_cast<unsigned char>(s[i + k]);
            if ((cont & 0xC0) != 0x80) {
                valid = false;
                break;
            }
            cp = (cp << 6) | (cont & 0x3F);
        }
        if (!valid) {
            out.push_back(c);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string encode_utf8(const std::u32string& s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : s) {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

bool is_space(char32_t c) {
    switch (c) {
        case U'\t':
        case U'\n':
        case U'\v':
        case U'\f':
        case U'\r':
        case U' ':
        case 0x0085:  // next line
        case 0x00A0:  // no-break space
        case 0x1680:
        case 0x2028:
        case 0x2029:
        case 0x202F:
        case 0x205F:
        case 0x3000:
            return true;
        default:
            return c >= 0x2000 && c <= 0x200A;
    }
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    std::u32string cp = decode_utf8(s);
    std::size_t begin = 0;
    std::size_t end = cp.size();
    while (begin < end && is_space(cp[begin])) ++begin;
    while (end > begin && is_space(cp[end - 1])) --end;
    return encode_utf8(cp.substr(begin, end - begin));
}

std::string collapse_whitespace(std::string_view s) {
    std::u32string cp = decode_utf8(s);
    std::u32string out;
    out.reserve(cp.size());
    bool in_run = false;
    for (char32_t c : cp) {
        if (is_space(c)) {
            in_run = true;
            continue;
        }
        if (in_run && !out.empty()) out.push_back(U' ');
        in_run = false;
        out.push_back(c);
    }
    return encode_utf8(out);
}

std::vector<std::string> split_tokens(std::string_view s) {
    std::u32string cp = decode_utf8(s);
    std::vector<std::string> out;
    std::u32string current;
    for (char32_t c : cp) {
        if (is_space(c)) {
            if (!current.empty()) {
                out.push_back(encode_utf8(current));
                current.clear();
            }
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) out.push_back(encode_utf8(current));
    return out;
}

std::string utf8_prefix(std::string_view s, std::size_t count) {
    std::u32string cp = decode_utf8(s);
    if (cp.size() > count) cp.resize(count);
    return encode_utf8(cp);
}

namespace {

// b f p v -> 1, c g j k q s x z -> 2, d t -> 3, l -> 4, m n -> 5, r -> 6;
// vowels and y are separators, h and w are transparent.
char soundex_code(char letter) {
    switch (letter) {
        case 'b': case 'f': case 'p': case 'v': return '1';
        case 'c': case 'g': case 'j': case 'k': case 'q': case 's': case 'x': case 'z': return '2';
        case 'd': case 't': return '3';
        case 'l': return '4';
        case 'm': case 'n': return '5';
        case 'r': return '6';
        default: return 0;
    }
}

}  // namespace

std::string soundex(std::string_view s) {
    std::string letters;
    for (char raw : s) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalpha(c)) letters.push_back(static_cast<char>(std::tolower(c)));
    }
    if (letters.empty()) return "";

    std::string out(1, static_cast<char>(std::toupper(static_cast<unsigned char>(letters[0]))));
    char prev_code = soundex_code(letters[0]);
    for (std::size_t i = 1; i < letters.size() && out.size() < 4; ++i) {
        char letter = letters[i];
        if (letter == 'h' || letter == 'w') continue;  // transparent: prev_code survives
        char code = soundex_code(letter);
        if (code == 0) {
            prev_code = 0;  // vowel separator resets the run
            continue;
        }
        if (code != prev_code) out.push_back(code);
        prev_code = code;
    }
    out.resize(4, '0');
    return out;
}

}  // namespace erkit::text
