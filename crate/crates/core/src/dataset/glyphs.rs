//! Built-in 25x20 letter templates.
//!
//! Each letter is a classic 5x7 bitmap scaled by 3 in both directions
//! (15x21) and placed with 2 blank rows above, 2 below, 2 blank columns on
//! the left and 3 on the right.

use std::sync::OnceLock;

use crate::extraction::PatternBlock;
use crate::models::{Label, LABEL_COUNT};

const SCALE: usize = 3;
const TOP: usize = 2;
const LEFT: usize = 2;

#[rustfmt::skip]
const FONT: [[&str; 7]; LABEL_COUNT] = [
    [".###.", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"], // A
    ["####.", "#...#", "#...#", "####.", "#...#", "#...#", "####."], // B
    [".###.", "#...#", "#....", "#....", "#....", "#...#", ".###."], // C
    ["####.", "#...#", "#...#", "#...#", "#...#", "#...#", "####."], // D
    ["#####", "#....", "#....", "####.", "#....", "#....", "#####"], // E
    ["#####", "#....", "#....", "####.", "#....", "#....", "#...."], // F
    [".###.", "#...#", "#....", "#.###", "#...#", "#...#", ".####"], // G
    ["#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"], // H
    [".###.", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."], // I
    ["..###", "...#.", "...#.", "...#.", "...#.", "#..#.", ".##.."], // J
    ["#...#", "#..#.", "#.#..", "##...", "#.#..", "#..#.", "#...#"], // K
    ["#....", "#....", "#....", "#....", "#....", "#....", "#####"], // L
    ["#...#", "##.##", "#.#.#", "#.#.#", "#...#", "#...#", "#...#"], // M
    ["#...#", "#...#", "##..#", "#.#.#", "#..##", "#...#", "#...#"], // N
    [".###.", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."], // O
    ["####.", "#...#", "#...#", "####.", "#....", "#....", "#...."], // P
    [".###.", "#...#", "#...#", "#...#", "#.#.#", "#..#.", ".##.#"], // Q
    ["####.", "#...#", "#...#", "####.", "#.#..", "#..#.", "#...#"], // R
    [".####", "#....", "#....", ".###.", "....#", "....#", "####."], // S
    ["#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."], // T
    ["#...#", "#...#", "#...#", "#...#", "#...#", "#...#", ".###."], // U
    ["#...#", "#...#", "#...#", "#...#", "#...#", ".#.#.", "..#.."], // V
    ["#...#", "#...#", "#...#", "#.#.#", "#.#.#", "#.#.#", ".#.#."], // W
    ["#...#", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", "#...#"], // X
    ["#...#", "#...#", ".#.#.", "..#..", "..#..", "..#..", "..#.."], // Y
    ["#####", "....#", "...#.", "..#..", ".#...", "#....", "#####"], // Z
];

fn render(rows: &[&str; 7]) -> PatternBlock {
    let mut block = PatternBlock::blank();
    for (fy, row) in rows.iter().enumerate() {
        for (fx, c) in row.bytes().enumerate() {
            if c != b'#' {
                continue;
            }
            for dy in 0..SCALE {
                for dx in 0..SCALE {
                    block.set(TOP + fy * SCALE + dy, LEFT + fx * SCALE + dx, true);
                }
            }
        }
    }
    block
}

/// Template for `label`.
pub fn template(label: Label) -> &'static PatternBlock {
    static TEMPLATES: OnceLock<Vec<PatternBlock>> = OnceLock::new();
    &TEMPLATES.get_or_init(|| FONT.iter().map(render).collect())[label.index()]
}
