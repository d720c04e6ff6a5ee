#include "gridagg/crypto.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <memory>

#include "gridagg/errors.hpp"

namespace gridagg {

namespace {

[[noreturn]] void ssl_fail(const char* what) {
  fail(Errc::IoError, std::string("OpenSSL: ") + what);
}

struct EvpPkeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, EvpPkeyDeleter>;

struct EvpMdCtxDeleter {
  void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, EvpMdCtxDeleter>;

struct EvpCipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, EvpCipherCtxDeleter>;

PkeyPtr raw_private_key(int type, std::span<const uint8_t> seed) {
  PkeyPtr key(EVP_PKEY_new_raw_private_key(type, nullptr, seed.data(), seed.size()));
  if (!key) ssl_fail("raw private key");
  return key;
}

Key256 raw_public_of(EVP_PKEY* key) {
  Key256 pub{};
  size_t len = pub.size();
  if (EVP_PKEY_get_raw_public_key(key, pub.data(), &len) != 1 || len != pub.size()) {
    ssl_fail("raw public key");
  }
  return pub;
}

}  // namespace

Sha256 sha256(std::span<const uint8_t> data) {
  return sha256_concat({data});
}

Sha256 sha256_concat(std::initializer_list<std::span<const uint8_t>> parts) {
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    ssl_fail("sha256 init");
  }
  for (auto part : parts) {
    if (EVP_DigestUpdate(ctx.get(), part.data(), part.size()) != 1) {
      ssl_fail("sha256 update");
    }
  }
  Sha256 out{};
  unsigned len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 || len != out.size()) {
    ssl_fail("sha256 final");
  }
  return out;
}

SigningKey SigningKey::from_seed(const Key256& seed) {
  PkeyPtr key = raw_private_key(EVP_PKEY_ED25519, seed);
  return SigningKey{seed, raw_public_of(key.get())};
}

Signature64 SigningKey::sign(std::span<const uint8_t> message) const {
  PkeyPtr key = raw_private_key(EVP_PKEY_ED25519, seed);
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx ||
      EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) {
    ssl_fail("ed25519 sign init");
  }
  Signature64 sig{};
  size_t len = sig.size();
  if (EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()) != 1 ||
      len != sig.size()) {
    ssl_fail("ed25519 sign");
  }
  return sig;
}

bool verify_signature(const Key256& public_key, std::span<const uint8_t> message,
                      const Signature64& signature) {
  PkeyPtr key(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, public_key.data(),
                                          public_key.size()));
  if (!key) ssl_fail("ed25519 public key");
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx ||
      EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) {
    ssl_fail("ed25519 verify init");
  }
  return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), message.data(),
                          message.size()) == 1;
}

DhKey DhKey::from_seed(const Key256& seed) {
  PkeyPtr key = raw_private_key(EVP_PKEY_X25519, seed);
  return DhKey{seed, raw_public_of(key.get())};
}

Key256 dh_shared(const DhKey& local, const Key256& remote_public) {
  PkeyPtr key = raw_private_key(EVP_PKEY_X25519, local.secret);
  PkeyPtr peer(EVP_PKEY_new_raw_public_key(EVP_PKEY_X25519, nullptr, remote_public.data(),
                                           remote_public.size()));
  if (!peer) ssl_fail("x25519 public key");
  std::unique_ptr<EVP_PKEY_CTX, decltype(&EVP_PKEY_CTX_free)> ctx(
      EVP_PKEY_CTX_new(key.get(), nullptr), EVP_PKEY_CTX_free);
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 ||
      EVP_PKEY_derive_set_peer(ctx.get(), peer.get()) != 1) {
    ssl_fail("x25519 derive init");
  }
  Key256 shared{};
  size_t len = shared.size();
  if (EVP_PKEY_derive(ctx.get(), shared.data(), &len) != 1 || len != shared.size()) {
    ssl_fail("x25519 derive");
  }
  return shared;
}

void aes128gcm_seal(const Key128& key, const Nonce96& nonce,
                    std::span<const uint8_t> aad, std::span<const uint8_t> pt,
                    std::span<uint8_t> ct_out, Tag128& tag_out) {
  if (ct_out.size() != pt.size()) fail(Errc::InvalidArgument, "ciphertext buffer size");
  CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx ||
      EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.data(),
                         nonce.data()) != 1) {
    ssl_fail("gcm encrypt init");
  }
  int len = 0;
  if (!aad.empty() &&
      EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1) {
    ssl_fail("gcm aad");
  }
  if (!pt.empty() &&
      EVP_EncryptUpdate(ctx.get(), ct_out.data(), &len, pt.data(),
                        static_cast<int>(pt.size())) != 1) {
    ssl_fail("gcm encrypt");
  }
  // GCM's final step emits no bytes; give it a scratch slot anyway.
  int fin = 0;
  uint8_t fin_buf[16];
  if (EVP_EncryptFinal_ex(ctx.get(), fin_buf, &fin) != 1) {
    ssl_fail("gcm encrypt final");
  }
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, static_cast<int>(tag_out.size()),
                          tag_out.data()) != 1) {
    ssl_fail("gcm tag");
  }
}

bool aes128gcm_open(const Key128& key, const Nonce96& nonce,
                    std::span<const uint8_t> aad, std::span<const uint8_t> ct,
                    const Tag128& tag, std::span<uint8_t> pt_out) {
  if (pt_out.size() != ct.size()) fail(Errc::InvalidArgument, "plaintext buffer size");
  CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx ||
      EVP_DecryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, key.data(),
                         nonce.data()) != 1) {
    ssl_fail("gcm decrypt init");
  }
  int len = 0;
  if (!aad.empty() &&
      EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1) {
    ssl_fail("gcm aad");
  }
  // Decrypt into a scratch buffer so a tag failure leaves pt_out untouched.
  Bytes scratch(ct.size());
  if (!ct.empty() &&
      EVP_DecryptUpdate(ctx.get(), scratch.data(), &len, ct.data(),
                        static_cast<int>(ct.size())) != 1) {
    ssl_fail("gcm decrypt");
  }
  Tag128 tag_copy = tag;
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, static_cast<int>(tag_copy.size()),
                          tag_copy.data()) != 1) {
    ssl_fail("gcm set tag");
  }
  int fin = 0;
  uint8_t fin_buf[16];
  if (EVP_DecryptFinal_ex(ctx.get(), fin_buf, &fin) != 1) {
    return false;
  }
  std::copy(scratch.begin(), scratch.end(), pt_out.begin());
  return true;
}

}  // namespace gridagg
