//! Binary weight checkpoints.
//!
//! Little-endian layout: the 8-byte magic `FTOPNET1`, the architecture
//! (`n_inputs`, `n_hidden`, `n_layers`, `n_outputs`, `output_bias`,
//! `batch_norm` as u64, `leaky_slope` as f64), a u64 flag for the frequency
//! bank followed, when set, by `seed`, sampling tag, `d`, `n_f` (u64),
//! `l_min`, `l_max`, `h` and the `d x n_f` matrix row-major (f64). Then the
//! trainable parameters as f64 in [`Params::blocks`] order and the batch-norm
//! running mean and variance per hidden layer.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::frequency::{FrequencyBank, FrequencySampling};
use super::network::{BatchNormStats, NetArch, Network, Params};
use crate::error::{Result, TopoError};

const MAGIC: &[u8; 8] = b"FTOPNET1";

fn put_u64(w: &mut impl Write, v: u64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_f64(w: &mut impl Write, v: f64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn get_u64(r: &mut impl Read) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_f64(r: &mut impl Read) -> std::io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn malformed(detail: impl Into<String>) -> TopoError {
    TopoError::Format {
        what: "weight checkpoint",
        detail: detail.into(),
    }
}

pub fn write_checkpoint(w: &mut impl Write, net: &Network, bank: Option<&FrequencyBank>) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    let a = net.arch();
    for v in [a.n_inputs, a.n_hidden, a.n_layers, a.n_outputs] {
        put_u64(w, v as u64)?;
    }
    put_u64(w, a.output_bias as u64)?;
    put_u64(w, a.batch_norm as u64)?;
    put_f64(w, a.leaky_slope)?;
    match bank {
        None => put_u64(w, 0)?,
        Some(b) => {
            put_u64(w, 1)?;
            put_u64(w, b.seed())?;
            put_u64(w, matches!(b.sampling(), FrequencySampling::Grid) as u64)?;
            put_u64(w, b.dim() as u64)?;
            put_u64(w, b.n_freqs() as u64)?;
            put_f64(w, b.l_min())?;
            put_f64(w, b.l_max())?;
            put_f64(w, b.h())?;
            for &f in b.freqs() {
                put_f64(w, f)?;
            }
        }
    }
    for v in net.params().to_flat() {
        put_f64(w, v)?;
    }
    for s in net.batch_norm_stats() {
        for &v in s.running_mean.iter().chain(s.running_var.iter()) {
            put_f64(w, v)?;
        }
    }
    Ok(())
}

pub fn read_checkpoint(r: &mut impl Read) -> Result<(Network, Option<FrequencyBank>)> {
    let io = |e: std::io::Error| malformed(e.to_string());
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err(malformed("bad magic"));
    }
    let mut dims = [0usize; 4];
    for d in &mut dims {
        *d = usize::try_from(get_u64(r).map_err(io)?).map_err(|_| malformed("dimension overflow"))?;
    }
    let arch = NetArch {
        n_inputs: dims[0],
        n_hidden: dims[1],
        n_layers: dims[2],
        n_outputs: dims[3],
        output_bias: get_u64(r).map_err(io)? != 0,
        batch_norm: get_u64(r).map_err(io)? != 0,
        leaky_slope: get_f64(r).map_err(io)?,
    };
    arch.validate().map_err(|e| malformed(e.to_string()))?;
    let bank = match get_u64(r).map_err(io)? {
        0 => None,
        1 => {
            let seed = get_u64(r).map_err(io)?;
            let sampling = if get_u64(r).map_err(io)? == 1 {
                FrequencySampling::Grid
            } else {
                FrequencySampling::Random
            };
            let d = get_u64(r).map_err(io)? as usize;
            let n_f = get_u64(r).map_err(io)? as usize;
            if !(1..=2).contains(&d) || n_f == 0 || 2 * n_f != arch.n_inputs {
                return Err(malformed(format!("frequency bank {d}x{n_f} inconsistent with input width {}", arch.n_inputs)));
            }
            let l_min = get_f64(r).map_err(io)?;
            let l_max = get_f64(r).map_err(io)?;
            let h = get_f64(r).map_err(io)?;
            let mut m = Vec::with_capacity(d * n_f);
            for _ in 0..d * n_f {
                m.push(get_f64(r).map_err(io)?);
            }
            let freqs = Array2::from_shape_vec((d, n_f), m).map_err(|e| malformed(e.to_string()))?;
            Some(FrequencyBank::from_parts(freqs, l_min, l_max, h, seed, sampling))
        }
        other => return Err(malformed(format!("unknown bank flag {other}"))),
    };
    let mut params = Params::zeros(&arch);
    let mut flat = Vec::with_capacity(arch.param_count());
    for _ in 0..arch.param_count() {
        flat.push(get_f64(r).map_err(io)?);
    }
    params.copy_from_flat(&flat)?;
    let mut stats = Vec::with_capacity(arch.n_layers);
    for _ in 0..arch.n_layers {
        let mut read_vec = || -> Result<Array1<f64>> {
            (0..arch.n_hidden).map(|_| get_f64(r).map_err(io)).collect::<Result<Vec<_>>>().map(Array1::from)
        };
        let running_mean = read_vec()?;
        let running_var = read_vec()?;
        stats.push(BatchNormStats { running_mean, running_var });
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(io)? != 0 {
        return Err(malformed("trailing bytes after batch-norm statistics"));
    }
    let mut net = Network::from_params(arch, params)?;
    net.set_batch_norm_stats(stats)?;
    Ok((net, bank))
}

pub fn save_checkpoint(path: &Path, net: &Network, bank: Option<&FrequencyBank>) -> Result<()> {
    let file = File::create(path).map_err(|e| TopoError::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_checkpoint(&mut w, net, bank)
        .and_then(|_| w.flush())
        .map_err(|e| TopoError::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<(Network, Option<FrequencyBank>)> {
    let file = File::open(path).map_err(|e| TopoError::io(path, e))?;
    read_checkpoint(&mut BufReader::new(file))
}
