fn main() {
    // Restore the default SIGPIPE disposition so `kc ... | head` exits
    // quietly instead of panicking on the closed pipe.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(kc::cli::run());
}
