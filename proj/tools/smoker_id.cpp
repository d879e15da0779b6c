/*
 * Copyright (c) the smoker authors.
 * SPDX-License-Identifier: Apache-2.0
 */
#include <CLI11.hpp>

#include <cstdio>

#include "smoker/identity.hpp"
#include "smoker/random.hpp"
#include "smoker/sigscheme.hpp"

using namespace smoker;

int main(int argc, char** argv) {
    CLI::App app{"clientID <-> public key mapping helper"};
    app.require_subcommand(1);

    std::string key_file;
    std::string out_file;
    std::string client_id;

    auto* keygen = app.add_subcommand("keygen", "generate a signing key file");
    keygen->add_option("--out", out_file, "key file to write")->required();

    auto* derive = app.add_subcommand("derive", "print the clientID for a key file");
    derive->add_option("--key", key_file, "key file (sk=<64 hex chars>)")->required();

    auto* decode = app.add_subcommand("decode", "print the public key hex for a clientID");
    decode->add_option("clientid", client_id, "43-character base62 clientID")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (keygen->parsed()) {
            SystemRandom rng;
            auto key = sig::SigningKey::generate(rng);
            key.save_file(out_file);
            std::printf("%s\n", identity::derive_client_id(key.verifying_key()).text.c_str());
        } else if (derive->parsed()) {
            auto key = sig::SigningKey::load_file(key_file);
            std::printf("%s\n", identity::derive_client_id(key.verifying_key()).text.c_str());
        } else if (decode->parsed()) {
            auto pk = identity::decode_client_id(client_id);
            std::printf("%s\n", to_hex(pk.view()).c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
