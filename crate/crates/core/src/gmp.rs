//! Raw bindings to the handful of libgmp entry points used by [`crate::rational`].

#![allow(non_camel_case_types)]

use std::os::raw::{c_char, c_int, c_long, c_ulong, c_void};

pub(crate) type mp_limb_t = u64;

#[repr(C)]
pub(crate) struct mpz_t {
    pub alloc: c_int,
    pub size: c_int,
    pub d: *mut mp_limb_t,
}

#[repr(C)]
pub(crate) struct mpq_t {
    pub num: mpz_t,
    pub den: mpz_t,
}

extern "C" {
    pub fn __gmpq_init(x: *mut mpq_t);
    pub fn __gmpq_clear(x: *mut mpq_t);
    pub fn __gmpq_set(r: *mut mpq_t, a: *const mpq_t);
    pub fn __gmpq_set_si(r: *mut mpq_t, n: c_long, d: c_ulong);
    pub fn __gmpq_set_z(r: *mut mpq_t, a: *const mpz_t);
    pub fn __gmpq_set_num(r: *mut mpq_t, a: *const mpz_t);
    pub fn __gmpq_set_den(r: *mut mpq_t, a: *const mpz_t);
    pub fn __gmpq_get_num(r: *mut mpz_t, a: *const mpq_t);
    pub fn __gmpq_get_den(r: *mut mpz_t, a: *const mpq_t);
    pub fn __gmpq_canonicalize(r: *mut mpq_t);
    pub fn __gmpq_add(r: *mut mpq_t, a: *const mpq_t, b: *const mpq_t);
    pub fn __gmpq_sub(r: *mut mpq_t, a: *const mpq_t, b: *const mpq_t);
    pub fn __gmpq_mul(r: *mut mpq_t, a: *const mpq_t, b: *const mpq_t);
    pub fn __gmpq_div(r: *mut mpq_t, a: *const mpq_t, b: *const mpq_t);
    pub fn __gmpq_neg(r: *mut mpq_t, a: *const mpq_t);
    pub fn __gmpq_abs(r: *mut mpq_t, a: *const mpq_t);
    pub fn __gmpq_inv(r: *mut mpq_t, a: *const mpq_t);
    pub fn __gmpq_cmp(a: *const mpq_t, b: *const mpq_t) -> c_int;
    pub fn __gmpq_equal(a: *const mpq_t, b: *const mpq_t) -> c_int;

    pub fn __gmpz_init(x: *mut mpz_t);
    pub fn __gmpz_clear(x: *mut mpz_t);
    pub fn __gmpz_set_si(r: *mut mpz_t, v: c_long);
    pub fn __gmpz_set_str(r: *mut mpz_t, s: *const c_char, base: c_int) -> c_int;
    pub fn __gmpz_get_str(buf: *mut c_char, base: c_int, a: *const mpz_t) -> *mut c_char;
    pub fn __gmpz_sizeinbase(a: *const mpz_t, base: c_int) -> usize;
    pub fn __gmpz_fdiv_q(q: *mut mpz_t, n: *const mpz_t, d: *const mpz_t);
    pub fn __gmpz_cdiv_q(q: *mut mpz_t, n: *const mpz_t, d: *const mpz_t);
    pub fn __gmpz_pow_ui(r: *mut mpz_t, b: *const mpz_t, e: c_ulong);
    pub fn __gmpz_cmp_ui(a: *const mpz_t, v: c_ulong) -> c_int;
    pub fn __gmpz_get_d_2exp(exp: *mut c_long, a: *const mpz_t) -> f64;
    pub fn __gmpz_import(
        r: *mut mpz_t,
        count: usize,
        order: c_int,
        size: usize,
        endian: c_int,
        nails: usize,
        op: *const c_void,
    );
    pub fn __gmpz_export(
        rop: *mut c_void,
        countp: *mut usize,
        order: c_int,
        size: usize,
        endian: c_int,
        nails: usize,
        op: *const mpz_t,
    ) -> *mut c_void;
}
